// SPDX-License-Identifier: Apache-2.0
#include "percwalk/walk.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include <Eigen/Dense>

#include "percwalk/rng.hpp"
#include "percwalk/util.hpp"

namespace percwalk {

double WalkGraph::mu_total() const {
  return double(adjncy.size());
}

int32_t WalkGraph::local_of(int64_t region_idx) const {
  auto it = std::lower_bound(verts.begin(), verts.end(), region_idx);
  if (it == verts.end() || *it != region_idx) return -1;
  return int32_t(it - verts.begin());
}

std::vector<int32_t> WalkGraph::distances(int32_t source) const {
  return distances_from(std::vector<int32_t>{source});
}

std::vector<int32_t> WalkGraph::distances_from(const std::vector<int32_t>& sources) const {
  std::vector<int32_t> dist(size_t(n()), kDistInf);
  std::deque<int32_t> queue;
  for (int32_t s : sources) {
    if (dist[size_t(s)] != 0) {
      dist[size_t(s)] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    int32_t u = queue.front();
    queue.pop_front();
    for (int32_t e = xadj[size_t(u)]; e < xadj[size_t(u) + 1]; ++e) {
      int32_t w = adjncy[size_t(e)];
      if (dist[size_t(w)] == kDistInf) {
        dist[size_t(w)] = dist[size_t(u)] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

WalkGraph make_walk_graph(const BondConfig& cfg, const Box& region,
                          const std::vector<int64_t>& verts) {
  WalkGraph g;
  g.region = region;
  g.verts = verts;
  std::sort(g.verts.begin(), g.verts.end());
  g.verts.erase(std::unique(g.verts.begin(), g.verts.end()), g.verts.end());
  size_t n = g.verts.size();
  std::vector<std::vector<int32_t>> adj(n);
  Coords c(region.dim());
  for (size_t i = 0; i < n; ++i) {
    region.coords_of(g.verts[i], c.data());
    for (int a = 0; a < region.dim(); ++a) {
      if (c[a] >= region.hi[a] || !cfg.open(a, c)) continue;
      c[a] += 1;
      int64_t widx = region.index_of(c);
      c[a] -= 1;
      auto it = std::lower_bound(g.verts.begin(), g.verts.end(), widx);
      if (it == g.verts.end() || *it != widx) continue;
      int32_t j = int32_t(it - g.verts.begin());
      adj[i].push_back(j);
      adj[size_t(j)].push_back(int32_t(i));
    }
  }
  g.xadj.assign(n + 1, 0);
  for (size_t i = 0; i < n; ++i) g.xadj[i + 1] = g.xadj[i] + int32_t(adj[i].size());
  g.adjncy.reserve(size_t(g.xadj[n]));
  for (size_t i = 0; i < n; ++i)
    for (int32_t j : adj[i]) g.adjncy.push_back(j);
  return g;
}

WalkGraph make_walk_graph(const WeightedSubgraph& sg) {
  WalkGraph g;
  g.region = sg.region;
  g.verts = sg.verts;
  size_t n = sg.verts.size();
  g.xadj.assign(n + 1, 0);
  for (size_t i = 0; i < n; ++i) g.xadj[i + 1] = g.xadj[i] + int32_t(sg.adj[i].size());
  g.adjncy.reserve(size_t(g.xadj[n]));
  for (size_t i = 0; i < n; ++i)
    for (int32_t j : sg.adj[i]) g.adjncy.push_back(j);
  return g;
}

int32_t Trajectory::state_at(double t) const {
  auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  return visited[size_t(it - jump_times.begin())];
}

Trajectory simulate_walk(const WalkGraph& g, int32_t x, double t_end, uint64_t seed) {
  if (g.degree(x) == 0)
    throw std::invalid_argument("simulate_walk: start vertex is isolated (mu = 0)");
  Trajectory traj;
  traj.start = x;
  traj.t_end = t_end;
  traj.seed = seed;
  traj.visited.push_back(x);
  CounterRng rng(seed);
  double t = 0;
  int32_t cur = x;
  while (true) {
    t += rng.next_exponential();
    if (t > t_end) break;
    int32_t deg = g.degree(cur);
    int32_t pick = (deg == 1) ? 0 : int32_t(rng.next_below(uint32_t(deg)));
    cur = g.adjncy[size_t(g.xadj[size_t(cur)] + pick)];
    traj.jump_times.push_back(t);
    traj.visited.push_back(cur);
  }
  return traj;
}

namespace {

constexpr double kPoissonTailTol = 1e-13;

double log_poisson(double t, int64_t k) {
  return double(k) * std::log(t) - t - std::lgamma(double(k) + 1.0);
}

// One substochastic jump step restricted to `alive` (empty = whole graph):
// out(y) = sum_{x ~ y} in(x) / mu(x). mu is the full degree, so mass moving
// to a vertex outside `alive` is killed.
void jump_step(const WalkGraph& g, const std::vector<uint8_t>& alive,
               const std::vector<double>& in, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  int32_t n = g.n();
  for (int32_t x = 0; x < n; ++x) {
    double vx = in[size_t(x)];
    if (vx == 0) continue;
    double share = vx / double(g.degree(x));
    for (int32_t e = g.xadj[size_t(x)]; e < g.xadj[size_t(x) + 1]; ++e) {
      int32_t y = g.adjncy[size_t(e)];
      if (alive.empty() || alive[size_t(y)]) out[size_t(y)] += share;
    }
  }
}

// P^x(Y_t = .) for all grid times by uniformization, with certified
// truncation of the Poisson tail. Killed mode zeroes mass outside `alive`.
void uniformized_rows(const WalkGraph& g, int32_t x, const std::vector<double>& times,
                      const std::vector<uint8_t>& alive,
                      std::vector<std::vector<double>>& out, double& trunc_error) {
  size_t n = size_t(g.n());
  out.assign(times.size(), std::vector<double>(n, 0.0));
  double t_max = 0;
  for (double t : times) {
    if (t < 0) throw std::invalid_argument("heat kernel: negative time");
    t_max = std::max(t_max, t);
  }
  std::vector<double> cur(n, 0.0), next(n, 0.0);
  cur[size_t(x)] = 1.0;
  if (!alive.empty() && !alive[size_t(x)]) cur[size_t(x)] = 0.0;
  std::vector<double> cum(times.size(), 0.0);
  int64_t k = 0;
  while (true) {
    bool all_done = true;
    for (size_t ti = 0; ti < times.size(); ++ti) {
      double t = times[ti];
      double w = (t == 0) ? (k == 0 ? 1.0 : 0.0) : std::exp(log_poisson(t, k));
      cum[ti] += w;
      if (w > 0) {
        auto& row = out[ti];
        for (size_t i = 0; i < n; ++i) row[i] += w * cur[i];
      }
      if (cum[ti] < 1.0 - kPoissonTailTol && double(k) < t + 60.0 * std::sqrt(t + 1.0) + 60.0)
        all_done = false;
    }
    if (all_done) break;
    jump_step(g, alive, cur, next);
    std::swap(cur, next);
    ++k;
  }
  trunc_error = 0;
  for (double c : cum) trunc_error = std::max(trunc_error, std::max(0.0, 1.0 - c));
}

std::vector<uint8_t> alive_mask(const WalkGraph& g, const std::vector<int32_t>* interior) {
  std::vector<uint8_t> alive;
  if (interior != nullptr) {
    alive.assign(size_t(g.n()), 0);
    for (int32_t v : *interior) alive[size_t(v)] = 1;
  }
  return alive;
}

}  // namespace

KernelRow exact_kernel_row(const WalkGraph& g, int32_t x, std::vector<double> times,
                           const std::vector<int32_t>* killed_interior) {
  KernelRow row;
  row.source = x;
  row.times = std::move(times);
  auto alive = alive_mask(g, killed_interior);
  uniformized_rows(g, x, row.times, alive, row.q, row.trunc_error);
  // convert P^x(Y_t = y) to q_t(x,y) = P / mu(y)
  for (auto& qt : row.q)
    for (int32_t y = 0; y < g.n(); ++y) qt[size_t(y)] /= g.mu(y);
  return row;
}

HeatKernel exact_heat_kernel(const WalkGraph& g, std::vector<double> times,
                             const std::vector<int32_t>* killed_interior,
                             KernelMethod method, int32_t dense_cap) {
  if (g.n() > dense_cap)
    throw std::invalid_argument(
        "exact_heat_kernel: graph exceeds the dense cap; use exact_kernel_row or mc_heat_kernel");
  HeatKernel ker;
  ker.times = std::move(times);
  ker.n = g.n();
  size_t n = size_t(g.n());
  ker.q.assign(ker.times.size(), std::vector<double>(n * n, 0.0));

  if (method == KernelMethod::Spectral) {
    auto alive = alive_mask(g, killed_interior);
    // S = D^{-1/2} A D^{-1/2} - I restricted to alive; q_t = D^{-1/2} e^{tS} D^{-1/2}
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(long(n), long(n));
    for (int32_t x = 0; x < g.n(); ++x) {
      if (!alive.empty() && !alive[size_t(x)]) continue;
      for (int32_t e = g.xadj[size_t(x)]; e < g.xadj[size_t(x) + 1]; ++e) {
        int32_t y = g.adjncy[size_t(e)];
        if (!alive.empty() && !alive[size_t(y)]) continue;
        s(x, y) += 1.0 / std::sqrt(g.mu(x) * g.mu(y));
      }
      s(x, x) -= 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const auto& U = es.eigenvectors();
    const auto& lam = es.eigenvalues();
    for (size_t ti = 0; ti < ker.times.size(); ++ti) {
      Eigen::VectorXd w = (ker.times[ti] * lam.array()).exp().matrix();
      Eigen::MatrixXd qt = U * w.asDiagonal() * U.transpose();
      for (int32_t x = 0; x < g.n(); ++x)
        for (int32_t y = 0; y < g.n(); ++y) {
          double v = qt(x, y) / std::sqrt(g.mu(x) * g.mu(y));
          if (!alive.empty() && (!alive[size_t(x)] || !alive[size_t(y)])) v = 0;
          ker.q[ti][size_t(x) * n + size_t(y)] = v;
        }
    }
    return ker;
  }

  for (int32_t x = 0; x < g.n(); ++x) {
    KernelRow row = exact_kernel_row(g, x, ker.times, killed_interior);
    ker.trunc_error = std::max(ker.trunc_error, row.trunc_error);
    for (size_t ti = 0; ti < ker.times.size(); ++ti)
      std::copy(row.q[ti].begin(), row.q[ti].end(), ker.q[ti].begin() + long(size_t(x) * n));
  }
  return ker;
}

KernelRow mc_heat_kernel(const WalkGraph& g, int32_t x, std::vector<double> times,
                         int64_t trials, uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("mc_heat_kernel: trials >= 1 required");
  KernelRow row;
  row.source = x;
  row.times = std::move(times);
  row.monte_carlo = true;
  row.trials = trials;
  size_t n = size_t(g.n());
  std::vector<std::vector<int64_t>> counts(row.times.size(), std::vector<int64_t>(n, 0));
  double t_max = 0;
  for (double t : row.times) t_max = std::max(t_max, t);
  for (int64_t trial = 0; trial < trials; ++trial) {
    Trajectory traj = simulate_walk(g, x, t_max, derive_seed(seed, {0x7A11, uint64_t(trial)}));
    for (size_t ti = 0; ti < row.times.size(); ++ti)
      counts[ti][size_t(traj.state_at(row.times[ti]))] += 1;
  }
  row.q.assign(row.times.size(), std::vector<double>(n, 0.0));
  row.se.assign(row.times.size(), std::vector<double>(n, 0.0));
  for (size_t ti = 0; ti < row.times.size(); ++ti) {
    for (size_t y = 0; y < n; ++y) {
      double f = double(counts[ti][y]) / double(trials);
      row.q[ti][y] = f / g.mu(int32_t(y));
      row.se[ti][y] = std::sqrt(f * (1 - f) / double(trials)) / g.mu(int32_t(y));
    }
  }
  return row;
}

double log_bessel_i(int64_t m, double z) {
  m = std::llabs(m);
  if (z == 0) return m == 0 ? 0.0 : -HUGE_VAL;
  // I_m(z) = sum_j (z/2)^{m+2j} / (j! (m+j)!), summed relative to the j=0 term
  double log_a0 = double(m) * std::log(z / 2) - std::lgamma(double(m) + 1.0);
  double rel = 1.0, sum = 1.0;
  double q = z * z / 4.0;
  for (int64_t j = 1; j < 40000; ++j) {
    rel *= q / (double(j) * double(m + j));
    sum += rel;
    if (rel < 1e-15 * sum) break;
  }
  return log_a0 + std::log(sum);
}

double lattice_oracle(int d, double t, std::span<const int64_t> y) {
  if (t < 0) throw std::invalid_argument("lattice_oracle: t >= 0 required");
  if (t == 0) {
    for (int64_t c : y)
      if (c != 0) return 0.0;
    return 1.0;
  }
  double logp = 0;
  for (int a = 0; a < d; ++a) logp += -t / d + log_bessel_i(y[size_t(a)], t / d);
  return std::exp(logp);
}

ExitTimeCdf exit_time_stats(const WalkGraph& g, int32_t x, int64_t r, int64_t trials,
                            std::vector<double> times, uint64_t seed, int threads) {
  auto dist = g.distances(x);
  bool has_outside = false;
  for (int32_t v = 0; v < g.n(); ++v)
    if (dist[size_t(v)] >= r && dist[size_t(v)] != kDistInf) has_outside = true;
  if (!has_outside)
    throw std::invalid_argument("exit_time_stats: B(x,r) is not strictly inside the graph");

  double t_max = 0;
  for (double t : times) t_max = std::max(t_max, t);
  std::vector<double> tau(size_t(trials), HUGE_VAL);
  parallel_for(
      trials,
      [&](int64_t trial) {
        CounterRng rng(derive_seed(seed, {0xE517, uint64_t(trial)}));
        double t = 0;
        int32_t cur = x;
        while (true) {
          t += rng.next_exponential();
          if (t > t_max) break;
          int32_t deg = g.degree(cur);
          int32_t pick = (deg == 1) ? 0 : int32_t(rng.next_below(uint32_t(deg)));
          cur = g.adjncy[size_t(g.xadj[size_t(cur)] + pick)];
          if (dist[size_t(cur)] >= r) {
            tau[size_t(trial)] = t;
            break;
          }
        }
      },
      threads);

  ExitTimeCdf cdf;
  cdf.r = r;
  cdf.times = std::move(times);
  cdf.trials = trials;
  for (double t : cdf.times) {
    int64_t cnt = 0;
    for (double s : tau)
      if (s < t) ++cnt;
    cdf.prob.push_back(double(cnt) / double(trials));
    auto w = wilson95(cnt, trials);
    cdf.ci_lo.push_back(w.lo);
    cdf.ci_hi.push_back(w.hi);
  }
  return cdf;
}

NashCurves nash_functionals(const WalkGraph& g, int32_t x1, std::vector<double> times) {
  NashCurves curves;
  curves.x1 = x1;
  curves.times = times;
  auto dist = g.distances(x1);
  KernelRow row = exact_kernel_row(g, x1, std::move(times));
  for (size_t ti = 0; ti < curves.times.size(); ++ti) {
    double m = 0, q = 0;
    for (int32_t y = 0; y < g.n(); ++y) {
      double qv = row.q[ti][size_t(y)];
      if (qv <= 0) continue;
      double mass = qv * g.mu(y);  // P^x(Y_t=y)
      m += double(dist[size_t(y)]) * mass;
      q -= mass * std::log(qv);
    }
    curves.M.push_back(m);
    curves.Q.push_back(q);
  }
  return curves;
}

MsdCurve msd_exact(const WalkGraph& g, int32_t x, std::vector<double> times) {
  MsdCurve curve;
  curve.times = times;
  KernelRow row = exact_kernel_row(g, x, std::move(times));
  Coords cx = g.coords(x);
  std::vector<double> d2(size_t(g.n()), 0.0);
  for (int32_t y = 0; y < g.n(); ++y) {
    Coords cy = g.coords(y);
    double s = 0;
    for (size_t a = 0; a < cx.size(); ++a) s += sq(double(cy[a] - cx[a]));
    d2[size_t(y)] = s;
  }
  for (size_t ti = 0; ti < curve.times.size(); ++ti) {
    double m = 0;
    for (int32_t y = 0; y < g.n(); ++y) m += row.q[ti][size_t(y)] * g.mu(y) * d2[size_t(y)];
    curve.msd.push_back(m);
    curve.se.push_back(0.0);
  }
  return curve;
}

MsdCurve msd_mc(const WalkGraph& g, int32_t x, std::vector<double> times, int64_t trials,
                uint64_t seed, int threads) {
  MsdCurve curve;
  curve.monte_carlo = true;
  curve.times = std::move(times);
  Coords cx = g.coords(x);
  double t_max = 0;
  for (double t : curve.times) t_max = std::max(t_max, t);
  std::vector<std::vector<double>> samples(size_t(trials),
                                           std::vector<double>(curve.times.size(), 0.0));
  parallel_for(
      trials,
      [&](int64_t trial) {
        Trajectory traj =
            simulate_walk(g, x, t_max, derive_seed(seed, {0x35D, uint64_t(trial)}));
        for (size_t ti = 0; ti < curve.times.size(); ++ti) {
          Coords cy = g.coords(traj.state_at(curve.times[ti]));
          double s = 0;
          for (size_t a = 0; a < cx.size(); ++a) s += sq(double(cy[a] - cx[a]));
          samples[size_t(trial)][ti] = s;
        }
      },
      threads);
  for (size_t ti = 0; ti < curve.times.size(); ++ti) {
    double mean = 0;
    for (int64_t tr = 0; tr < trials; ++tr) mean += samples[size_t(tr)][ti];
    mean /= double(trials);
    double var = 0;
    for (int64_t tr = 0; tr < trials; ++tr) var += sq(samples[size_t(tr)][ti] - mean);
    var /= std::max<double>(1, double(trials - 1));
    curve.msd.push_back(mean);
    curve.se.push_back(std::sqrt(var / double(trials)));
  }
  return curve;
}

}  // namespace percwalk
