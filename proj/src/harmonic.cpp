// SPDX-License-Identifier: Apache-2.0
#include "percwalk/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "percwalk/rng.hpp"

namespace percwalk {

GraphBall graph_ball(const WalkGraph& g, int32_t center, int64_t r) {
  auto dist = g.distances(center);
  GraphBall ball;
  std::vector<uint8_t> in(size_t(g.n()), 0);
  for (int32_t v = 0; v < g.n(); ++v)
    if (dist[size_t(v)] != kDistInf && dist[size_t(v)] < r) {
      ball.interior.push_back(v);
      in[size_t(v)] = 1;
    }
  std::vector<uint8_t> bd(size_t(g.n()), 0);
  for (int32_t v : ball.interior)
    for (int32_t e = g.xadj[size_t(v)]; e < g.xadj[size_t(v) + 1]; ++e) {
      int32_t w = g.adjncy[size_t(e)];
      if (!in[size_t(w)] && !bd[size_t(w)]) {
        bd[size_t(w)] = 1;
        ball.boundary.push_back(w);
      }
    }
  std::sort(ball.boundary.begin(), ball.boundary.end());
  return ball;
}

HarmonicSolution solve_dirichlet(const WalkGraph& g, const std::vector<int32_t>& ball,
                                 const std::vector<double>& boundary_values, double tol) {
  HarmonicSolution sol;
  sol.ball = ball;
  std::sort(sol.ball.begin(), sol.ball.end());

  std::vector<int32_t> idx(size_t(g.n()), -1);  // interior index
  for (size_t i = 0; i < sol.ball.size(); ++i) idx[size_t(sol.ball[i])] = int32_t(i);

  std::vector<uint8_t> bd(size_t(g.n()), 0);
  for (int32_t v : sol.ball)
    for (int32_t e = g.xadj[size_t(v)]; e < g.xadj[size_t(v) + 1]; ++e) {
      int32_t w = g.adjncy[size_t(e)];
      if (idx[size_t(w)] < 0 && !bd[size_t(w)]) {
        bd[size_t(w)] = 1;
        sol.boundary.push_back(w);
      }
    }
  std::sort(sol.boundary.begin(), sol.boundary.end());
  if (sol.boundary.size() != boundary_values.size())
    throw std::invalid_argument("solve_dirichlet: boundary value count mismatch (need " +
                                std::to_string(sol.boundary.size()) + ")");

  sol.h.assign(size_t(g.n()), 0.0);
  for (size_t i = 0; i < sol.boundary.size(); ++i)
    sol.h[size_t(sol.boundary[i])] = boundary_values[i];

  // every interior vertex must reach the boundary
  {
    std::vector<uint8_t> reach(size_t(g.n()), 0);
    std::vector<int32_t> stack(sol.boundary);
    for (int32_t v : stack) reach[size_t(v)] = 1;
    while (!stack.empty()) {
      int32_t u = stack.back();
      stack.pop_back();
      for (int32_t e = g.xadj[size_t(u)]; e < g.xadj[size_t(u) + 1]; ++e) {
        int32_t w = g.adjncy[size_t(e)];
        if (idx[size_t(w)] >= 0 && !reach[size_t(w)]) {
          reach[size_t(w)] = 1;
          stack.push_back(w);
        }
      }
    }
    for (int32_t v : sol.ball)
      if (!reach[size_t(v)])
        throw std::invalid_argument("solve_dirichlet: interior vertex with no path to boundary");
  }

  // L_II h_I = -L_IB g with the unnormalized Laplacian (same kernel as (0.1))
  long n = long(sol.ball.size());
  Eigen::SparseMatrix<double> A(n, n);
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (size_t i = 0; i < sol.ball.size(); ++i) {
    int32_t v = sol.ball[i];
    double deg = 0;
    for (int32_t e = g.xadj[size_t(v)]; e < g.xadj[size_t(v) + 1]; ++e) {
      int32_t w = g.adjncy[size_t(e)];
      deg += 1;
      if (idx[size_t(w)] >= 0)
        trip.emplace_back(int(i), int(idx[size_t(w)]), -1.0);
      else
        rhs(long(i)) += sol.h[size_t(w)];
    }
    trip.emplace_back(int(i), int(i), deg);
  }
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("solve_dirichlet: factorization failed");
  Eigen::VectorXd h = solver.solve(rhs);
  for (size_t i = 0; i < sol.ball.size(); ++i) sol.h[size_t(sol.ball[i])] = h(long(i));

  sol.residual = 0;
  for (int32_t v : sol.ball) {
    double lh = 0;
    for (int32_t e = g.xadj[size_t(v)]; e < g.xadj[size_t(v) + 1]; ++e)
      lh += sol.h[size_t(g.adjncy[size_t(e)])] - sol.h[size_t(v)];
    sol.residual = std::max(sol.residual, std::abs(lh / g.mu(v)));
  }
  (void)tol;
  return sol;
}

double harnack_ratio(const HarmonicSolution& sol, const std::vector<int32_t>& inner) {
  if (inner.empty()) throw std::invalid_argument("harnack_ratio: empty inner ball");
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (int32_t v : inner) {
    lo = std::min(lo, sol.h[size_t(v)]);
    hi = std::max(hi, sol.h[size_t(v)]);
  }
  if (lo <= 0)
    throw std::invalid_argument("harnack_ratio: solution not positive on the inner ball");
  return hi / lo;
}

OscillationReport oscillation_decay(const WalkGraph& g, int32_t center, int64_t R,
                                    int datasets, uint64_t seed) {
  OscillationReport rep;
  GraphBall b0 = graph_ball(g, center, R);
  GraphBall b1 = graph_ball(g, center, (R + 1) / 2);
  if (b0.boundary.empty())
    throw std::invalid_argument("oscillation_decay: ball has no boundary");
  for (int k = 0; k < datasets; ++k) {
    CounterRng rng(derive_seed(seed, {0x05C, uint64_t(k)}));
    std::vector<double> bv(b0.boundary.size());
    for (auto& v : bv) v = 0.1 + rng.next_uniform();
    HarmonicSolution sol = solve_dirichlet(g, b0.interior, bv);

    double blo = HUGE_VAL, bhi = -HUGE_VAL;
    for (double v : bv) {
      blo = std::min(blo, v);
      bhi = std::max(bhi, v);
    }
    double ilo = HUGE_VAL, ihi = -HUGE_VAL;
    for (int32_t v : b0.interior) {
      ilo = std::min(ilo, sol.h[size_t(v)]);
      ihi = std::max(ihi, sol.h[size_t(v)]);
    }
    if (ilo < blo - 1e-9 || ihi > bhi + 1e-9) rep.max_principle_ok = false;

    double osc0 = 0, osc1 = 0;
    {
      double lo = blo, hi = bhi;  // Osc over B0-bar includes the boundary
      for (int32_t v : b0.interior) {
        lo = std::min(lo, sol.h[size_t(v)]);
        hi = std::max(hi, sol.h[size_t(v)]);
      }
      osc0 = hi - lo;
      lo = HUGE_VAL;
      hi = -HUGE_VAL;
      for (int32_t v : b1.interior) {
        lo = std::min(lo, sol.h[size_t(v)]);
        hi = std::max(hi, sol.h[size_t(v)]);
      }
      osc1 = hi - lo;
    }
    rep.factors.push_back(osc0 == 0 ? 0.0 : osc1 / osc0);
  }
  for (double f : rep.factors) rep.max_factor = std::max(rep.max_factor, f);
  return rep;
}

PendantCubeGraph remark410_graph(int d, int64_t R, int64_t s) {
  if (d < 2) throw std::invalid_argument("remark410_graph: d >= 2 required");
  // ambient slab [0,s] x [0,2R]^{d-1} plus a bridge vertex at (s+1, 0,...)
  // and the pendant cube [s+2, s+R+1] x [0,R-1]^{d-1}
  Coords lo(size_t(d), 0), hi(size_t(d), 2 * R);
  hi[0] = s + R + 1;
  Box region(lo, hi);

  std::vector<int64_t> verts;
  Coords c(size_t(d));
  auto in_slab = [&](const Coords& q) {
    if (q[0] < 0 || q[0] > s) return false;
    for (int a = 1; a < d; ++a)
      if (q[size_t(a)] < 0 || q[size_t(a)] > 2 * R) return false;
    return true;
  };
  auto in_cube = [&](const Coords& q) {
    if (q[0] < s + 2 || q[0] > s + R + 1) return false;
    for (int a = 1; a < d; ++a)
      if (q[size_t(a)] < 0 || q[size_t(a)] > R - 1) return false;
    return true;
  };
  auto is_bridge = [&](const Coords& q) {
    if (q[0] != s + 1) return false;
    for (int a = 1; a < d; ++a)
      if (q[size_t(a)] != 0) return false;
    return true;
  };
  for (int64_t v = 0; v < region.vertex_count(); ++v) {
    region.coords_of(v, c.data());
    if (in_slab(c) || in_cube(c) || is_bridge(c)) verts.push_back(v);
  }

  // adjacency: lattice edges within slab, within cube, plus the two bridge
  // edges through (s+1, 0, ..., 0)
  std::vector<std::array<int32_t, 2>> edges;
  auto lookup = [&](const Coords& q) -> int32_t {
    if (!region.contains(q)) return -1;
    int64_t idx = region.index_of(q);
    auto it = std::lower_bound(verts.begin(), verts.end(), idx);
    if (it == verts.end() || *it != idx) return -1;
    return int32_t(it - verts.begin());
  };
  auto same_part = [&](const Coords& a, const Coords& b) {
    if (in_slab(a) && in_slab(b)) return true;
    if (in_cube(a) && in_cube(b)) return true;
    if (is_bridge(a) || is_bridge(b)) return true;  // bridge edges allowed
    return false;
  };
  Coords q(size_t(d));
  for (size_t i = 0; i < verts.size(); ++i) {
    region.coords_of(verts[i], c.data());
    for (int a = 0; a < d; ++a) {
      q = c;
      q[size_t(a)] += 1;
      int32_t j = lookup(q);
      if (j < 0) continue;
      if (!same_part(c, q)) continue;
      edges.push_back({int32_t(i), j});
    }
  }

  WeightedSubgraph sg = make_subgraph(region, verts, edges);
  PendantCubeGraph out;
  out.graph = make_walk_graph(sg);
  Coords x0c(size_t(d), R);
  x0c[0] = 0;
  out.x0 = out.graph.local_of(region.index_of(x0c));

  for (int32_t v = 0; v < out.graph.n(); ++v) {
    region.coords_of(out.graph.verts[size_t(v)], c.data());
    if (in_cube(c)) out.cube.push_back(v);
  }

  // psi_R(x) = exp(-d(x0,x)/R); ratio for f = 1_cube
  auto dist = out.graph.distances(out.x0);
  std::vector<double> psi(size_t(out.graph.n()), 0.0);
  for (int32_t v = 0; v < out.graph.n(); ++v)
    psi[size_t(v)] = std::exp(-double(dist[size_t(v)]) / double(R));
  std::vector<uint8_t> fc(size_t(out.graph.n()), 0);
  for (int32_t v : out.cube) fc[size_t(v)] = 1;

  double mass = 0, fmass = 0;
  for (int32_t v = 0; v < out.graph.n(); ++v) {
    double m = psi[size_t(v)] * out.graph.mu(v);
    mass += m;
    if (fc[size_t(v)]) fmass += m;
  }
  double fbar = fmass / mass;
  double num = 0;
  for (int32_t v = 0; v < out.graph.n(); ++v) {
    double f = fc[size_t(v)] ? 1.0 : 0.0;
    num += (f - fbar) * (f - fbar) * psi[size_t(v)] * out.graph.mu(v);
  }
  double energy = 0;
  for (int32_t v = 0; v < out.graph.n(); ++v) {
    for (int32_t e = out.graph.xadj[size_t(v)]; e < out.graph.xadj[size_t(v) + 1]; ++e) {
      int32_t w = out.graph.adjncy[size_t(e)];
      if (w <= v) continue;  // each edge once
      double df = double(fc[size_t(v)]) - double(fc[size_t(w)]);
      energy += df * df * std::min(psi[size_t(v)], psi[size_t(w)]);
    }
  }
  out.numerator = num;
  out.denominator = double(R) * double(R) * energy;
  out.ratio = out.denominator == 0 ? HUGE_VAL : num / out.denominator;
  return out;
}

}  // namespace percwalk
