// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "percwalk/cluster.hpp"
#include "percwalk/config.hpp"
#include "percwalk/geometry.hpp"

namespace percwalk {

// CSR graph for the continuous-time walk: exp(1) holding times, uniform jump
// over the open incident edges, mu(x) = degree.
struct WalkGraph {
  Box region;
  std::vector<int64_t> verts;  // region indices, sorted
  std::vector<int32_t> xadj, adjncy;

  int32_t n() const { return int32_t(verts.size()); }
  int32_t degree(int32_t v) const { return xadj[size_t(v) + 1] - xadj[size_t(v)]; }
  double mu(int32_t v) const { return degree(v); }
  double mu_total() const;
  int32_t local_of(int64_t region_idx) const;
  Coords coords(int32_t v) const { return region.coords_of(verts[size_t(v)]); }

  // graph (chemical) distances from source, kDistInf where unreachable
  std::vector<int32_t> distances(int32_t source) const;
  std::vector<int32_t> distances_from(const std::vector<int32_t>& sources) const;
};

WalkGraph make_walk_graph(const BondConfig& cfg, const Box& region,
                          const std::vector<int64_t>& verts);
WalkGraph make_walk_graph(const WeightedSubgraph& g);

struct Trajectory {
  int32_t start = 0;
  double t_end = 0;
  uint64_t seed = 0;
  std::vector<double> jump_times;  // strictly increasing, <= t_end
  std::vector<int32_t> visited;    // visited[0] = start; visited[i] after jump i

  int32_t state_at(double t) const;
};

Trajectory simulate_walk(const WalkGraph& g, int32_t x, double t_end, uint64_t seed);

// Heat kernel q_t(x,y) = P^x(Y_t = y) / mu(y). `killed_interior` switches to
// the kernel of the walk killed on exiting that vertex set (rows/columns
// outside it are zero).
enum class KernelMethod { Uniformization, Spectral };

struct HeatKernel {
  std::vector<double> times;
  int32_t n = 0;
  std::vector<std::vector<double>> q;  // per time, row-major n*n
  double trunc_error = 0;              // certified uniformization tail bound

  double at(size_t ti, int32_t x, int32_t y) const {
    return q[ti][size_t(x) * size_t(n) + size_t(y)];
  }
};

HeatKernel exact_heat_kernel(const WalkGraph& g, std::vector<double> times,
                             const std::vector<int32_t>* killed_interior = nullptr,
                             KernelMethod method = KernelMethod::Uniformization,
                             int32_t dense_cap = 4000);

struct KernelRow {
  int32_t source = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> q;   // per time, per vertex
  std::vector<std::vector<double>> se;  // standard errors (Monte Carlo only)
  bool monte_carlo = false;
  double trunc_error = 0;
  int64_t trials = 0;
};

KernelRow exact_kernel_row(const WalkGraph& g, int32_t x, std::vector<double> times,
                           const std::vector<int32_t>* killed_interior = nullptr);
KernelRow mc_heat_kernel(const WalkGraph& g, int32_t x, std::vector<double> times,
                         int64_t trials, uint64_t seed);

// Full-lattice oracle at p = 1: P^0(Y_t = y) on Z^d as a product of
// coordinate kernels e^{-t/d} I_{y_i}(t/d); series truncated at 1e-15.
double lattice_oracle(int d, double t, std::span<const int64_t> y);
double log_bessel_i(int64_t m, double z);

struct ExitTimeCdf {
  int64_t r = 0;
  std::vector<double> times, prob, ci_lo, ci_hi;
  int64_t trials = 0;
};

ExitTimeCdf exit_time_stats(const WalkGraph& g, int32_t x, int64_t r, int64_t trials,
                            std::vector<double> times, uint64_t seed, int threads = 0);

struct NashCurves {
  int32_t x1 = 0;
  std::vector<double> times, M, Q;
};

// M(t) = sum_y d(x1,y) q_t(x1,y) mu(y), Q(t) = -sum_y q log q mu (0 log 0 = 0)
NashCurves nash_functionals(const WalkGraph& g, int32_t x1, std::vector<double> times);

struct MsdCurve {
  std::vector<double> times, msd, se;
  bool monte_carlo = false;
};

MsdCurve msd_exact(const WalkGraph& g, int32_t x, std::vector<double> times);
MsdCurve msd_mc(const WalkGraph& g, int32_t x, std::vector<double> times, int64_t trials,
                uint64_t seed, int threads = 0);

}  // namespace percwalk
