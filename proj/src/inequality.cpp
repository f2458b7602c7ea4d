// SPDX-License-Identifier: Apache-2.0
#include "percwalk/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include <Eigen/Dense>

#include "percwalk/rng.hpp"
#include "percwalk/util.hpp"

namespace percwalk {

namespace {

double subset_cut(const WeightedSubgraph& g, uint32_t mask) {
  double cut = 0;
  for (const auto& e : g.edges) {
    bool a = (mask >> e[0]) & 1, b = (mask >> e[1]) & 1;
    if (a != b) cut += 1;
  }
  return cut;
}

bool mask_connected(const std::vector<uint32_t>& adj_mask, uint32_t mask) {
  if (mask == 0) return false;
  uint32_t seen = mask & (~mask + 1);  // lowest set bit
  while (true) {
    uint32_t frontier = 0;
    uint32_t m = seen;
    while (m) {
      int v = __builtin_ctz(m);
      m &= m - 1;
      frontier |= adj_mask[size_t(v)];
    }
    uint32_t next = (seen | frontier) & mask;
    if (next == seen) break;
    seen = next;
  }
  return seen == mask;
}

std::vector<int32_t> mask_to_locals(uint32_t mask) {
  std::vector<int32_t> out;
  while (mask) {
    out.push_back(int32_t(__builtin_ctz(mask)));
    mask &= mask - 1;
  }
  return out;
}

}  // namespace

IsoperimetryReport isoperimetry(const WeightedSubgraph& H, IsoMode mode, int max_exact,
                                uint64_t seed, int search_iters) {
  int n = H.n();
  if (n < 2) throw std::invalid_argument("isoperimetry: |H| >= 2 required");
  if (!H.connected()) {
    // name a separating pair for the error message
    std::vector<uint8_t> seen(size_t(n), 0);
    std::deque<int32_t> q{0};
    seen[0] = 1;
    while (!q.empty()) {
      int32_t u = q.front();
      q.pop_front();
      for (int32_t w : H.adj[size_t(u)])
        if (!seen[size_t(w)]) {
          seen[size_t(w)] = 1;
          q.push_back(w);
        }
    }
    int32_t other = 0;
    for (int32_t v = 0; v < n; ++v)
      if (!seen[size_t(v)]) other = v;
    throw std::invalid_argument(
        "isoperimetry: H disconnected (no path between local vertices 0 and " +
        std::to_string(other) + ")");
  }

  IsoperimetryReport rep;
  double mu0H = H.mu0_total(), muH = H.mu_total();

  if (mode == IsoMode::Exact) {
    if (n > max_exact)
      throw std::invalid_argument("isoperimetry: |H| exceeds the exact enumeration cap");
    std::vector<uint32_t> adj_mask(size_t(n), 0);
    for (const auto& e : H.edges) {
      adj_mask[size_t(e[0])] |= uint32_t(1) << e[1];
      adj_mask[size_t(e[1])] |= uint32_t(1) << e[0];
    }
    uint32_t full = (uint32_t(1) << n) - 1;
    double bestI = HUGE_VAL, bestIs = HUGE_VAL, bestJ = HUGE_VAL;
    uint32_t wI = 0, wIs = 0, wJ = 0;
    for (uint32_t mask = 1; mask < full; ++mask) {
      double mu0A = 0, muA = 0;
      uint32_t m = mask;
      while (m) {
        int v = __builtin_ctz(m);
        m &= m - 1;
        mu0A += H.mu0[size_t(v)];
        muA += H.mu[size_t(v)];
      }
      double cut = subset_cut(H, mask);
      if (mu0A > 0 && 2 * mu0A <= mu0H) {
        double i = cut / mu0A;
        if (i < bestI) {
          bestI = i;
          wI = mask;
        }
      }
      if (mu0A > 0 && mu0A < mu0H) {
        double chi = mu0H * cut / (mu0A * (mu0H - mu0A));
        if (chi < bestJ) {
          bestJ = chi;
          wJ = mask;
        }
      }
      if (mu0A > 0 && 2 * muA <= muH && mask_connected(adj_mask, mask) &&
          mask_connected(adj_mask, full & ~mask)) {
        double i = cut / mu0A;
        if (i < bestIs) {
          bestIs = i;
          wIs = mask;
        }
      }
    }
    rep.I_H = bestI;
    rep.I_star = bestIs;
    rep.J_H = bestJ;
    rep.witness_I = mask_to_locals(wI);
    rep.witness_Istar = mask_to_locals(wIs);
    rep.witness_J = mask_to_locals(wJ);
    rep.exact = true;
    return rep;
  }

  // randomized sweep: grow connected sets from random seeds and keep the best
  // quotients seen; upper-bound witnesses only
  rep.exact = false;
  CounterRng rng(seed);
  double bestI = HUGE_VAL, bestIs = HUGE_VAL, bestJ = HUGE_VAL;
  std::vector<int32_t> wI, wIs, wJ;
  std::vector<uint8_t> inA(size_t(n), 0);
  for (int iter = 0; iter < search_iters; ++iter) {
    std::fill(inA.begin(), inA.end(), 0);
    std::vector<int32_t> A{int32_t(rng.next_below(uint32_t(n)))};
    inA[size_t(A[0])] = 1;
    double mu0A = H.mu0[size_t(A[0])];
    double cut = double(H.adj[size_t(A[0])].size());
    while (true) {
      if (2 * mu0A <= mu0H && mu0A > 0) {
        double i = cut / mu0A;
        if (i < bestI) {
          bestI = i;
          wI = A;
        }
        if (i < bestIs) {
          std::vector<uint8_t> seen(inA);
          int32_t s = -1;
          for (int32_t v = 0; v < n; ++v)
            if (!inA[size_t(v)]) {
              s = v;
              break;
            }
          if (s >= 0) {
            std::deque<int32_t> q{s};
            seen[size_t(s)] = 1;
            int cnt = 1;
            while (!q.empty()) {
              int32_t u = q.front();
              q.pop_front();
              for (int32_t w : H.adj[size_t(u)])
                if (!seen[size_t(w)]) {
                  seen[size_t(w)] = 1;
                  ++cnt;
                  q.push_back(w);
                }
            }
            if (cnt == n - int(A.size())) {
              bestIs = i;
              wIs = A;
            }
          }
        }
      }
      if (mu0A > 0 && mu0A < mu0H) {
        double chi = mu0H * cut / (mu0A * (mu0H - mu0A));
        if (chi < bestJ) {
          bestJ = chi;
          wJ = A;
        }
      }
      if (int(A.size()) >= n - 1) break;
      // grow by the boundary vertex that keeps the cut smallest, with a
      // little randomness across restarts
      int32_t best_v = -1;
      double best_cut = HUGE_VAL;
      for (int32_t a : A) {
        for (int32_t w : H.adj[size_t(a)]) {
          if (inA[size_t(w)]) continue;
          double delta = 0;
          for (int32_t z : H.adj[size_t(w)]) delta += inA[size_t(z)] ? -1 : 1;
          double cnew = cut + delta;
          if (cnew < best_cut || (cnew == best_cut && rng.next_uniform() < 0.5)) {
            best_cut = cnew;
            best_v = w;
          }
        }
      }
      if (best_v < 0) break;
      inA[size_t(best_v)] = 1;
      A.push_back(best_v);
      std::sort(A.begin(), A.end());
      mu0A += H.mu0[size_t(best_v)];
      cut = best_cut;
      if (2 * mu0A > mu0H && rng.next_uniform() < 0.5) break;
    }
  }
  rep.I_H = bestI;
  rep.I_star = bestIs;
  rep.J_H = bestJ;
  rep.witness_I = wI;
  rep.witness_Istar = wIs;
  rep.witness_J = wJ;
  return rep;
}

namespace {

struct EnergyProblem {
  std::vector<int32_t> comp_verts;            // energy local ids in the component
  std::vector<int32_t> pos;                   // energy local -> component local
  std::vector<std::array<int32_t, 2>> edges;  // component-local
  std::vector<double> ew;                     // edge weights
  std::vector<double> w;                      // vertex variance weights
  double wsum = 0;
};

void laplacian_apply(const EnergyProblem& p, const std::vector<double>& x,
                     std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (size_t e = 0; e < p.edges.size(); ++e) {
    auto [a, b] = p.edges[e];
    double d = p.ew[e] * (x[size_t(a)] - x[size_t(b)]);
    out[size_t(a)] += d;
    out[size_t(b)] -= d;
  }
}

// CG for L z = rhs with rhs orthogonal to the constant kernel
int cg_solve(const EnergyProblem& p, const std::vector<double>& rhs, std::vector<double>& z,
             double tol, int max_iters) {
  size_t n = p.w.size();
  std::vector<double> diag(n, 0.0);
  for (size_t e = 0; e < p.edges.size(); ++e) {
    diag[size_t(p.edges[e][0])] += p.ew[e];
    diag[size_t(p.edges[e][1])] += p.ew[e];
  }
  for (auto& d : diag)
    if (d <= 0) d = 1;
  z.assign(n, 0.0);
  std::vector<double> r(rhs), zprec(n), q(n), dir(n);
  double rnorm0 = 0;
  for (double v : r) rnorm0 += v * v;
  rnorm0 = std::sqrt(rnorm0);
  if (rnorm0 == 0) return 0;
  for (size_t i = 0; i < n; ++i) zprec[i] = r[i] / diag[i];
  dir = zprec;
  double rz = 0;
  for (size_t i = 0; i < n; ++i) rz += r[i] * zprec[i];
  int it = 0;
  for (; it < max_iters; ++it) {
    laplacian_apply(p, dir, q);
    double dq = 0;
    for (size_t i = 0; i < n; ++i) dq += dir[i] * q[i];
    if (dq <= 0) break;
    double alpha = rz / dq;
    double rnorm = 0;
    for (size_t i = 0; i < n; ++i) {
      z[i] += alpha * dir[i];
      r[i] -= alpha * q[i];
      rnorm += r[i] * r[i];
    }
    if (std::sqrt(rnorm) <= tol * rnorm0) break;
    double rz_new = 0;
    for (size_t i = 0; i < n; ++i) {
      zprec[i] = r[i] / diag[i];
      rz_new += r[i] * zprec[i];
    }
    double beta = rz_new / rz;
    rz = rz_new;
    for (size_t i = 0; i < n; ++i) dir[i] = zprec[i] + beta * dir[i];
  }
  return it;
}

double dense_top_eigenvalue(const EnergyProblem& p) {
  int n = int(p.w.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (size_t e = 0; e < p.edges.size(); ++e) {
    auto [a, b] = p.edges[e];
    L(a, a) += p.ew[e];
    L(b, b) += p.ew[e];
    L(a, b) -= p.ew[e];
    L(b, a) -= p.ew[e];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  const auto& lam = es.eigenvalues();
  const auto& V = es.eigenvectors();
  double lmax = lam(n - 1);
  if (lmax <= 0) return 0;
  double kernel_tol = 1e-12 * lmax;
  int k0 = 0;
  while (k0 < n && lam(k0) <= kernel_tol) ++k0;
  int k = n - k0;
  if (k == 0) return 0;

  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = p.w[size_t(i)];
  Eigen::MatrixXd Vp = V.rightCols(k);
  Eigen::MatrixXd M = Vp.transpose() * w.asDiagonal() * Vp;
  Eigen::VectorXd vw = Vp.transpose() * w;
  if (p.wsum > 0) M -= (vw * vw.transpose()) / p.wsum;
  for (int i = 0; i < k; ++i) {
    double si = 1.0 / std::sqrt(lam(k0 + i));
    M.row(i) *= si;
    M.col(i) *= si;
  }
  Eigen::MatrixXd Msym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(Msym);
  return std::max(0.0, es2.eigenvalues()(k - 1));
}

// Lanczos on T = A L^+ A' with A = P_u W^{1/2}; the largest eigenvalue of T
// is the best Poincare constant.
double lanczos_top_eigenvalue(const EnergyProblem& p, const PoincareOptions& opts,
                              int* iterations) {
  size_t n = p.w.size();
  std::vector<double> sqrtw(n), u(n);
  double nrm2 = 0;
  for (size_t i = 0; i < n; ++i) {
    sqrtw[i] = std::sqrt(p.w[i]);
    nrm2 += p.w[i];
  }
  double nrm = std::sqrt(nrm2);
  for (size_t i = 0; i < n; ++i) u[i] = sqrtw[i] / nrm;

  auto applyT = [&](const std::vector<double>& v, std::vector<double>& out) {
    double uv = 0;
    for (size_t i = 0; i < n; ++i) uv += u[i] * v[i];
    std::vector<double> rhs(n);
    for (size_t i = 0; i < n; ++i) rhs[i] = sqrtw[i] * (v[i] - u[i] * uv);
    std::vector<double> z;
    cg_solve(p, rhs, z, opts.cg_tol, opts.cg_max_iters);
    double uy = 0;
    std::vector<double> y(n);
    for (size_t i = 0; i < n; ++i) {
      y[i] = sqrtw[i] * z[i];
      uy += u[i] * y[i];
    }
    out.resize(n);
    for (size_t i = 0; i < n; ++i) out[i] = y[i] - u[i] * uy;
  };

  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  std::vector<double> v(n), tv;
  CounterRng rng(0x9C5);
  for (size_t i = 0; i < n; ++i) v[i] = rng.next_uniform() - 0.5;
  auto normalize = [&](std::vector<double>& x) {
    double s = 0;
    for (double t : x) s += t * t;
    s = std::sqrt(s);
    if (s > 0)
      for (double& t : x) t /= s;
    return s;
  };
  normalize(v);
  double prev = -1;
  int it = 0;
  for (; it < opts.max_lanczos; ++it) {
    basis.push_back(v);
    applyT(v, tv);
    double a = 0;
    for (size_t i = 0; i < n; ++i) a += v[i] * tv[i];
    alpha.push_back(a);
    for (const auto& b : basis) {  // full reorthogonalization
      double dd = 0;
      for (size_t i = 0; i < n; ++i) dd += b[i] * tv[i];
      for (size_t i = 0; i < n; ++i) tv[i] -= dd * b[i];
    }
    double bnorm = normalize(tv);
    bool check = (it % 4 == 3) || bnorm < 1e-14 || it + 1 == opts.max_lanczos;
    if (check) {
      int k = int(alpha.size());
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
      for (int i = 0; i < k; ++i) {
        T(i, i) = alpha[size_t(i)];
        if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[size_t(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      double top = es.eigenvalues()(k - 1);
      if (bnorm < 1e-14 || (prev >= 0 && std::abs(top - prev) <= opts.tol * std::abs(top))) {
        if (iterations) *iterations = it + 1;
        return std::max(0.0, top);
      }
      prev = top;
    }
    beta.push_back(bnorm);
    v = tv;
  }
  if (iterations) *iterations = it;
  return std::max(0.0, prev);
}

}  // namespace

PoincareResult poincare_constant_full(const WeightedSubgraph& domain,
                                      const WeightedSubgraph& energy,
                                      const std::vector<double>* phi,
                                      const std::vector<double>* phi_edge,
                                      const PoincareOptions& opts) {
  if (domain.n() == 0) throw std::invalid_argument("poincare_constant: empty domain");
  size_t ne = size_t(energy.n());

  std::vector<double> w(ne, 0.0);
  for (int32_t i = 0; i < domain.n(); ++i) {
    int32_t j = energy.local_of(domain.verts[size_t(i)]);
    if (j < 0)
      throw std::invalid_argument("poincare_constant: domain vertex missing from energy graph");
    double f = phi ? (*phi)[size_t(i)] : 1.0;
    w[size_t(j)] = f * domain.mu[size_t(i)];
  }
  double wsum = 0;
  for (double v : w) wsum += v;
  if (wsum <= 0) return {0.0, false, true, 0};

  // mass split across components of the energy graph => infinite constant
  std::vector<int32_t> comp(ne, -1);
  int32_t ncomp = 0;
  for (size_t s = 0; s < ne; ++s) {
    if (comp[s] != -1) continue;
    std::deque<int32_t> q{int32_t(s)};
    comp[s] = ncomp;
    while (!q.empty()) {
      int32_t x = q.front();
      q.pop_front();
      for (int32_t y : energy.adj[size_t(x)])
        if (comp[size_t(y)] == -1) {
          comp[size_t(y)] = ncomp;
          q.push_back(y);
        }
    }
    ++ncomp;
  }
  std::vector<double> mass(size_t(ncomp), 0.0);
  for (size_t i = 0; i < ne; ++i) mass[size_t(comp[i])] += w[i];
  int32_t home = -1;
  for (int32_t c = 0; c < ncomp; ++c) {
    if (mass[size_t(c)] <= 0) continue;
    if (home != -1) return {HUGE_VAL, true, true, 0};
    home = c;
  }

  EnergyProblem p;
  p.pos.assign(ne, -1);
  for (size_t i = 0; i < ne; ++i) {
    if (comp[i] != home) continue;
    p.pos[i] = int32_t(p.comp_verts.size());
    p.comp_verts.push_back(int32_t(i));
  }
  if (p.comp_verts.size() <= 1) return {0.0, false, true, 0};
  for (size_t e = 0; e < energy.edges.size(); ++e) {
    auto [a, b] = energy.edges[e];
    if (comp[size_t(a)] != home) continue;
    double ew = phi_edge ? (*phi_edge)[e] : 1.0;
    if (ew <= 0) continue;
    p.edges.push_back({p.pos[size_t(a)], p.pos[size_t(b)]});
    p.ew.push_back(ew);
  }
  p.w.resize(p.comp_verts.size());
  for (size_t i = 0; i < p.comp_verts.size(); ++i) p.w[i] = w[size_t(p.comp_verts[i])];
  p.wsum = wsum;

  PoincareResult res;
  if (int(p.comp_verts.size()) <= opts.dense_cap) {
    res.constant = dense_top_eigenvalue(p);
    res.dense = true;
  } else {
    res.constant = lanczos_top_eigenvalue(p, opts, &res.iterations);
    res.dense = false;
  }
  return res;
}

double poincare_constant(const WeightedSubgraph& domain, const WeightedSubgraph& energy,
                         const std::vector<double>* phi, const std::vector<double>* phi_edge,
                         const PoincareOptions& opts) {
  return poincare_constant_full(domain, energy, phi, phi_edge, opts).constant;
}

GoodnessConstants default_goodness_constants(int d, double p) {
  GoodnessConstants k;
  if (p >= 1.0) {
    k.C_V = 1.0;
    k.C_P = 1.0;
    k.C_W = 1.0;
  } else {
    // fitted at desk-scale supercritical densities; configuration parameters,
    // not claims
    k.C_V = 0.15;
    k.C_P = 12.0;
    k.C_W = 2.0;
  }
  (void)d;
  k.C_E = 1.0;
  k.C_F = 8.0;
  return k;
}

namespace {

int64_t ceil_radius(double rho) { return int64_t(std::ceil(rho)); }

bool touches_boundary(const Box& region, const std::vector<int64_t>& verts) {
  Coords c(size_t(region.dim()));
  for (int64_t v : verts) {
    region.coords_of(v, c.data());
    for (int a = 0; a < region.dim(); ++a)
      if (c[a] == region.lo[a] || c[a] == region.hi[a]) return true;
  }
  return false;
}

bool edge_open_between(const BondConfig& cfg, const Coords& c, int axis, int64_t dir) {
  if (dir > 0) return cfg.open(axis, c);
  Coords t(c);
  t[size_t(axis)] -= 1;
  return cfg.open(axis, t);
}

}  // namespace

GoodnessReport classify_good(const BondConfig& cfg, const Box& region, int64_t x, int64_t r,
                             const GoodnessConstants& k, const PoincareOptions& popts) {
  GoodnessReport rep;
  rep.constants = k;
  int d = region.dim();
  ChemicalBall ball = chemical_ball(cfg, region, x, r);
  ChemicalBall enlarged = chemical_ball(cfg, region, x, ceil_radius(k.C_W * double(r)));
  rep.unreliable = touches_boundary(region, enlarged.verts);

  double mu = 0;
  Coords c(size_t(d));
  for (int64_t v : ball.verts) {
    region.coords_of(v, c.data());
    mu += cfg.open_degree(c);
  }
  rep.volume_mu = mu;
  rep.volume_required = k.C_V * std::pow(double(r), d);
  if (mu < rep.volume_required) {
    rep.failure = "volume";
    rep.failing_center = x;
    rep.failing_radius = r;
    return rep;
  }

  WeightedSubgraph dom = induced_graph(cfg, region, ball.verts);
  WeightedSubgraph en = induced_graph(cfg, region, enlarged.verts);
  rep.poincare = poincare_constant(dom, en, nullptr, nullptr, popts);
  rep.poincare_allowed = k.C_P * double(r) * double(r);
  if (!(rep.poincare <= rep.poincare_allowed)) {
    rep.failure = "poincare";
    rep.failing_center = x;
    rep.failing_radius = r;
    return rep;
  }
  rep.verdict = GoodnessLevel::Good;
  return rep;
}

namespace {

std::vector<int64_t> radius_grid_for(int64_t R, const VeryGoodOptions& vopts) {
  std::vector<int64_t> grid;
  if (R <= vopts.exact_all_radii_max) {
    for (int64_t r = 1; r <= R; ++r) grid.push_back(r);
  } else {
    int64_t r = 1;
    while (r < R) {
      grid.push_back(r);
      r = std::max(r + 1, int64_t(std::ceil(double(r) * vopts.grid_ratio)));
    }
    grid.push_back(R);
  }
  return grid;
}

}  // namespace

GoodnessReport classify_very_good(const BondConfig& cfg, const Box& region, int64_t x,
                                  int64_t R, const GoodnessConstants& k,
                                  const VeryGoodOptions& vopts, const PoincareOptions& popts) {
  GoodnessReport rep;
  rep.constants = k;
  int d = region.dim();
  rep.scale_bound = std::pow(double(R), 1.0 / double(d + 2));
  auto dist = bfs_distances(cfg, region, {x}, R - 1);
  std::vector<int64_t> ball_verts;
  for (int64_t v = 0; v < int64_t(dist.size()); ++v)
    if (dist[size_t(v)] != kDistInf && dist[size_t(v)] < R) ball_verts.push_back(v);
  if (ball_verts.empty()) throw std::invalid_argument("classify_very_good: empty ball");
  rep.radius_grid = radius_grid_for(R, vopts);

  // descend radii; the largest failing radius fixes N_B and smaller radii
  // cannot change it
  int64_t largest_fail = 0;
  for (auto it = rep.radius_grid.rbegin(); it != rep.radius_grid.rend(); ++it) {
    int64_t r = *it;
    std::vector<int64_t> centers;
    for (int64_t v : ball_verts)
      if (int64_t(dist[size_t(v)]) + r <= R) centers.push_back(v);
    if (centers.empty()) continue;
    std::vector<uint8_t> ok(centers.size(), 1), clipped(centers.size(), 0);
    parallel_for(
        int64_t(centers.size()),
        [&](int64_t i) {
          GoodnessReport sub = classify_good(cfg, region, centers[size_t(i)], r, k, popts);
          ok[size_t(i)] = sub.verdict == GoodnessLevel::Good;
          clipped[size_t(i)] = sub.unreliable;
        },
        vopts.threads);
    for (size_t i = 0; i < centers.size(); ++i) {
      if (clipped[i]) rep.unreliable = true;
      if (!ok[i] && largest_fail == 0) {
        largest_fail = r;
        rep.failing_center = centers[i];
        rep.failing_radius = r;
        rep.failure = "subball";
      }
    }
    if (largest_fail > 0) break;
  }

  rep.N_B = std::max<double>(1, double(largest_fail + 1));
  if (rep.N_B <= rep.scale_bound) {
    rep.verdict = GoodnessLevel::VeryGood;
    rep.failure.clear();
    rep.failing_center = -1;
    rep.failing_radius = 0;
  } else if (rep.failure.empty()) {
    rep.failure = "scale";
  }
  return rep;
}

GoodnessReport classify_exceedingly_good(const BondConfig& cfg, const Box& region, int64_t x0,
                                         int64_t R1, const GoodnessConstants& k,
                                         const ExceedinglyGoodOptions& opts,
                                         const PoincareOptions& popts) {
  int d = region.dim();
  GoodnessReport rep = classify_very_good(cfg, region, x0, R1, k, opts.vopts, popts);
  rep.scale_bound = std::pow(double(R1), 1.0 / double(10 * (d + 2)));
  if (rep.verdict != GoodnessLevel::VeryGood || rep.N_B > rep.scale_bound) {
    rep.verdict = GoodnessLevel::None;
    if (rep.failure.empty()) rep.failure = "scale";
    return rep;  // condition 1 fails before any path search
  }

  auto dist0 = bfs_distances(cfg, region, {x0}, R1 - 1);
  std::vector<int64_t> ball;
  for (int64_t v = 0; v < int64_t(dist0.size()); ++v)
    if (dist0[size_t(v)] != kDistInf && dist0[size_t(v)] < R1) ball.push_back(v);

  double slack = std::pow(double(R1), 0.25);
  double rmax = std::pow(rep.N_B, double(2 + d));
  std::vector<int64_t> rs;
  for (int i = 0; i < opts.r_samples; ++i) {
    double f = opts.r_samples == 1 ? 0 : double(i) / double(opts.r_samples - 1);
    int64_t r = int64_t(std::llround(k.C_E * std::pow(std::max(1.0, rmax / k.C_E), f)));
    if (double(r) >= k.C_E && double(r) <= rmax) rs.push_back(r);
  }
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());

  CounterRng rng(opts.seed);
  Coords c(size_t(d));
  for (int64_t r : rs) {
    int64_t rho = std::max<int64_t>(1, int64_t(std::ceil(double(r) * std::log(double(r)))));
    double nb_bound = std::pow(double(r), 1.0 / double(2 + d));
    std::vector<int8_t> marked(size_t(region.vertex_count()), -1);  // -1 unknown
    auto mark = [&](int64_t z) {
      if (marked[size_t(z)] >= 0) return marked[size_t(z)] != 0;
      bool ok;
      if (rho == 1) {
        ok = true;  // single-vertex chain balls are trivially very good
      } else {
        GoodnessReport g = classify_very_good(cfg, region, z, rho, k, opts.vopts, popts);
        ok = g.verdict == GoodnessLevel::VeryGood && g.N_B <= nb_bound;
      }
      marked[size_t(z)] = ok ? 1 : 0;
      return ok;
    };

    for (int pair = 0; pair < opts.pair_samples; ++pair) {
      int64_t x1 = ball[size_t(rng.next_below(uint32_t(ball.size())))];
      int64_t x2 = ball[size_t(rng.next_below(uint32_t(ball.size())))];
      auto d1 = bfs_distances(cfg, region, {x1}, -1);
      if (d1[size_t(x2)] == kDistInf || double(d1[size_t(x2)]) < slack) continue;
      auto d2 = bfs_distances(cfg, region, {x2}, -1);

      std::vector<int64_t> starts;
      for (int64_t v : ball)
        if (d1[size_t(v)] != kDistInf && double(d1[size_t(v)]) <= slack && mark(v))
          starts.push_back(v);
      std::vector<int32_t> plen(size_t(region.vertex_count()), kDistInf);
      std::deque<int64_t> q;
      for (int64_t s : starts) {
        plen[size_t(s)] = 0;
        q.push_back(s);
      }
      int64_t found = -1;
      while (!q.empty() && found < 0) {
        int64_t u = q.front();
        q.pop_front();
        if (d2[size_t(u)] != kDistInf && double(d2[size_t(u)]) <= slack) {
          found = u;
          break;
        }
        region.coords_of(u, c.data());
        for (int a = 0; a < d && found < 0; ++a) {
          for (int64_t dir : {int64_t(1), int64_t(-1)}) {
            Coords nb(c);
            nb[size_t(a)] += dir;
            if (!region.contains(nb)) continue;
            if (!edge_open_between(cfg, c, a, dir)) continue;
            int64_t wv = region.index_of(nb);
            if (plen[size_t(wv)] != kDistInf) continue;
            if (dist0[size_t(wv)] == kDistInf || dist0[size_t(wv)] >= R1) continue;
            if (!mark(wv)) continue;
            plen[size_t(wv)] = plen[size_t(u)] + 1;
            q.push_back(wv);
          }
        }
      }
      bool ok = found >= 0 && double(plen[size_t(found)]) <= k.C_F * double(d1[size_t(x2)]);
      if (!ok) {
        rep.verdict = GoodnessLevel::None;
        rep.failure = "path";
        rep.failing_center = x1;
        rep.failing_radius = r;
        return rep;
      }
    }
  }
  rep.verdict = GoodnessLevel::ExceedinglyGood;
  return rep;
}

WhitneyCover whitney_cover(const BondConfig& cfg, const Box& region, int64_t x0, int64_t R,
                           double lambda, double K, double R0) {
  if (lambda < 8 || K < 1 || K > lambda)
    throw std::invalid_argument("whitney_cover: need lambda >= 8 and 1 <= K <= lambda");
  WhitneyCover cov;
  cov.lambda = lambda;
  cov.K = K;
  cov.R0 = R0;
  int d = region.dim();

  ChemicalBall B = chemical_ball(cfg, region, x0, R);
  std::vector<uint8_t> inB(size_t(region.vertex_count()), 0);
  for (int64_t v : B.verts) inB[size_t(v)] = 1;

  // rho(x) = distance to the ball complement within the open graph
  std::vector<int64_t> ext_sources;
  {
    Coords c(size_t(d));
    std::vector<uint8_t> added(inB.size(), 0);
    for (int64_t v : B.verts) {
      region.coords_of(v, c.data());
      for (int a = 0; a < d; ++a) {
        for (int64_t dir : {int64_t(1), int64_t(-1)}) {
          Coords nb(c);
          nb[size_t(a)] += dir;
          if (!region.contains(nb)) continue;
          if (!edge_open_between(cfg, c, a, dir)) continue;
          int64_t w = region.index_of(nb);
          if (!inB[size_t(w)] && !added[size_t(w)]) {
            added[size_t(w)] = 1;
            ext_sources.push_back(w);
          }
        }
      }
    }
  }
  if (ext_sources.empty())
    throw std::invalid_argument("whitney_cover: ball has no external boundary");
  auto rho_all = bfs_distances(cfg, region, ext_sources, -1);
  auto rho = [&](int64_t v) { return double(rho_all[size_t(v)]); };

  auto ball_of = [&](int64_t center, double radius) {
    std::vector<int64_t> out;
    if (radius <= 0) return out;
    std::vector<int32_t> dist(size_t(region.vertex_count()), kDistInf);
    std::deque<int64_t> q{center};
    dist[size_t(center)] = 0;
    Coords c(size_t(d));
    while (!q.empty()) {
      int64_t u = q.front();
      q.pop_front();
      out.push_back(u);
      if (double(dist[size_t(u)]) + 1 >= radius) continue;
      region.coords_of(u, c.data());
      for (int a = 0; a < d; ++a) {
        for (int64_t dir : {int64_t(1), int64_t(-1)}) {
          Coords nb(c);
          nb[size_t(a)] += dir;
          if (!region.contains(nb)) continue;
          if (!edge_open_between(cfg, c, a, dir)) continue;
          int64_t w = region.index_of(nb);
          if (dist[size_t(w)] == kDistInf) {
            dist[size_t(w)] = dist[size_t(u)] + 1;
            q.push_back(w);
          }
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  };

  // greedy packing, largest rho first, lexicographic tie-break
  std::vector<int64_t> order(B.verts);
  std::sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    if (rho_all[size_t(a)] != rho_all[size_t(b)]) return rho_all[size_t(a)] > rho_all[size_t(b)];
    return a < b;
  });
  std::vector<uint8_t> covered(inB.size(), 0);
  struct Raw {
    int64_t center;
    double s;
  };
  std::vector<Raw> raw;
  for (int64_t y : order) {
    double s = rho(y) / lambda;
    if (s < R0 + 1) continue;  // r_N >= R0 + 1 > r_{N+1}
    auto base = ball_of(y, s);
    bool clash = false;
    for (int64_t v : base)
      if (covered[size_t(v)]) {
        clash = true;
        break;
      }
    if (clash) continue;
    for (int64_t v : base) covered[size_t(v)] = 1;
    raw.push_back({y, s});
  }

  double eta = 2 * (lambda + 2 * K);
  std::vector<WhitneyBall> interior, boundary;
  for (const auto& r : raw) {
    WhitneyBall wb;
    wb.center = r.center;
    wb.s = r.s;
    wb.boundary = r.s < eta * R0;
    wb.bprime = ball_of(r.center, 3 * r.s);
    if (wb.boundary) {
      // connected component of B(y, 2 lambda s) ∩ B containing y
      auto big = ball_of(r.center, 2 * lambda * r.s);
      std::vector<uint8_t> keep(inB.size(), 0);
      for (int64_t v : big)
        if (inB[size_t(v)]) keep[size_t(v)] = 1;
      std::vector<int64_t> comp;
      std::deque<int64_t> q{r.center};
      std::vector<uint8_t> seen(inB.size(), 0);
      seen[size_t(r.center)] = 1;
      Coords c(size_t(d));
      while (!q.empty()) {
        int64_t u = q.front();
        q.pop_front();
        comp.push_back(u);
        region.coords_of(u, c.data());
        for (int a = 0; a < d; ++a) {
          for (int64_t dir : {int64_t(1), int64_t(-1)}) {
            Coords nb(c);
            nb[size_t(a)] += dir;
            if (!region.contains(nb)) continue;
            if (!edge_open_between(cfg, c, a, dir)) continue;
            int64_t w = region.index_of(nb);
            if (keep[size_t(w)] && !seen[size_t(w)]) {
              seen[size_t(w)] = 1;
              q.push_back(w);
            }
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      wb.bsecond = std::move(comp);
    } else {
      wb.bsecond = ball_of(r.center, 10 * r.s);
    }
    (wb.boundary ? boundary : interior).push_back(std::move(wb));
  }

  // the interior ball whose B' contains x0 goes first
  for (size_t i = 0; i < interior.size(); ++i) {
    if (std::binary_search(interior[i].bprime.begin(), interior[i].bprime.end(), x0)) {
      std::rotate(interior.begin(), interior.begin() + long(i), interior.begin() + long(i) + 1);
      break;
    }
  }
  cov.M = int(interior.size());
  cov.balls = std::move(interior);
  for (auto& b : boundary) cov.balls.push_back(std::move(b));

  cov.disjoint_ok = true;
  {
    std::vector<uint8_t> mark(inB.size(), 0);
    for (const auto& b : cov.balls)
      for (int64_t v : ball_of(b.center, b.s)) {
        if (mark[size_t(v)]) cov.disjoint_ok = false;
        mark[size_t(v)] = 1;
      }
  }
  {
    std::vector<uint8_t> cov_mask(inB.size(), 0);
    for (int i = 0; i < int(cov.balls.size()); ++i) {
      const auto& verts = (i < cov.M) ? cov.balls[size_t(i)].bprime : cov.balls[size_t(i)].bsecond;
      for (int64_t v : verts)
        if (inB[size_t(v)]) cov_mask[size_t(v)] = 1;
    }
    cov.cover_ok = true;
    for (int64_t v : B.verts)
      if (!cov_mask[size_t(v)]) cov.cover_ok = false;
  }
  {
    cov.sandwich_ok = true;
    std::vector<int> overlap(inB.size(), 0);
    double lam1 = lambda - K, lam2 = lambda + K;
    for (const auto& b : cov.balls) {
      for (int64_t v : ball_of(b.center, K * b.s)) {
        if (!inB[size_t(v)]) continue;
        overlap[size_t(v)] += 1;
        double rr = rho(v);
        if (rr < lam1 * b.s - 0.5 || rr > lam2 * b.s + 0.5 * (1 + lambda)) cov.sandwich_ok = false;
      }
    }
    cov.max_overlap = 0;
    for (int o : overlap) cov.max_overlap = std::max(cov.max_overlap, o);
  }

  // chains F(i), F*(j) from canonical geodesics x0 -> y_i
  {
    size_t nb = cov.balls.size();
    std::vector<std::vector<int32_t>> at_vertex(inB.size());
    for (size_t j = 0; j < nb; ++j)
      for (int64_t v : ball_of(cov.balls[j].center, K * cov.balls[j].s))
        at_vertex[size_t(v)].push_back(int32_t(j));
    std::vector<int64_t> parent(inB.size(), -1);
    std::vector<int32_t> dist(inB.size(), kDistInf);
    std::deque<int64_t> q{x0};
    dist[size_t(x0)] = 0;
    Coords c(size_t(d));
    while (!q.empty()) {
      int64_t u = q.front();
      q.pop_front();
      region.coords_of(u, c.data());
      for (int a = 0; a < d; ++a) {
        for (int64_t dir : {int64_t(1), int64_t(-1)}) {
          Coords nbc(c);
          nbc[size_t(a)] += dir;
          if (!region.contains(nbc)) continue;
          if (!edge_open_between(cfg, c, a, dir)) continue;
          int64_t w = region.index_of(nbc);
          if (dist[size_t(w)] == kDistInf) {
            dist[size_t(w)] = dist[size_t(u)] + 1;
            parent[size_t(w)] = u;
            q.push_back(w);
          }
        }
      }
    }
    cov.chain_F.assign(nb, {});
    cov.chain_Fstar.assign(nb, {});
    for (size_t i = 0; i < nb; ++i) {
      std::vector<int32_t> hit;
      int64_t v = cov.balls[i].center;
      while (v != -1) {
        for (int32_t j : at_vertex[size_t(v)]) hit.push_back(j);
        v = parent[size_t(v)];
      }
      std::sort(hit.begin(), hit.end());
      hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
      cov.chain_F[i] = std::move(hit);
    }
    for (size_t i = 0; i < nb; ++i)
      for (int32_t j : cov.chain_F[i]) cov.chain_Fstar[size_t(j)].push_back(int32_t(i));
  }
  return cov;
}

BallWeight compute_weight(const BondConfig& cfg, const Box& region,
                          const std::vector<int64_t>& ball, int64_t R) {
  BallWeight w;
  w.verts = ball;
  std::sort(w.verts.begin(), w.verts.end());
  int d = region.dim();
  std::vector<uint8_t> inB(size_t(region.vertex_count()), 0);
  for (int64_t v : w.verts) inB[size_t(v)] = 1;

  std::vector<int64_t> ext;
  Coords c(size_t(d));
  std::vector<uint8_t> added(inB.size(), 0);
  for (int64_t v : w.verts) {
    region.coords_of(v, c.data());
    for (int a = 0; a < d; ++a) {
      for (int64_t dir : {int64_t(1), int64_t(-1)}) {
        Coords nb(c);
        nb[size_t(a)] += dir;
        if (!region.contains(nb)) continue;
        if (!edge_open_between(cfg, c, a, dir)) continue;
        int64_t u = region.index_of(nb);
        if (!inB[size_t(u)] && !added[size_t(u)]) {
          added[size_t(u)] = 1;
          ext.push_back(u);
        }
      }
    }
  }

  std::vector<int32_t> rho_full;
  if (ext.empty())
    rho_full.assign(size_t(region.vertex_count()), kDistInf);
  else
    rho_full = bfs_distances(cfg, region, ext, -1);

  std::vector<double> phi_by_region(size_t(region.vertex_count()), 0.0);
  for (int64_t v : w.verts) {
    int32_t r = rho_full[size_t(v)];
    w.rho.push_back(r);
    double rho = (r == kDistInf) ? double(R) : double(r);
    double t = std::min(double(R), rho) / double(R);
    w.phi.push_back(t * t);
    phi_by_region[size_t(v)] = t * t;
  }
  for (size_t i = 0; i < w.verts.size(); ++i) {
    region.coords_of(w.verts[i], c.data());
    for (int a = 0; a < d; ++a) {
      if (c[a] >= region.hi[a] || !cfg.open(a, c)) continue;
      c[a] += 1;
      int64_t u = region.index_of(c);
      c[a] -= 1;
      if (!inB[size_t(u)]) continue;
      auto it = std::lower_bound(w.verts.begin(), w.verts.end(), u);
      int32_t j = int32_t(it - w.verts.begin());
      w.edges.push_back({int32_t(i), j});
      w.phi_edge.push_back(std::min(w.phi[i], phi_by_region[size_t(u)]));
    }
  }
  return w;
}

}  // namespace percwalk
