// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "percwalk/cluster.hpp"
#include "percwalk/config.hpp"
#include "percwalk/geometry.hpp"

namespace percwalk {

enum class IsoMode { Exact, Search };

// i(A) = nu(d_E(A, H-A)) / mu0(A) minimized over 0 < mu0(A) <= mu0(H)/2;
// I* restricts to A with A and H-A connected (and mu(A) <= mu(H)/2);
// chi(A) = mu0(H) nu(d_E) / (mu0(A) mu0(H-A)) minimized over proper A.
struct IsoperimetryReport {
  double I_H = 0, I_star = 0, J_H = 0;
  std::vector<int32_t> witness_I, witness_Istar, witness_J;  // local ids
  bool exact = true;
};

IsoperimetryReport isoperimetry(const WeightedSubgraph& H, IsoMode mode = IsoMode::Exact,
                                int max_exact = 18, uint64_t seed = 1, int search_iters = 2000);

struct PoincareOptions {
  int dense_cap = 1200;       // dense generalized eigensolve up to this size
  double tol = 1e-10;         // relative eigenvalue tolerance (iterative path)
  int max_lanczos = 400;
  int cg_max_iters = 20000;
  double cg_tol = 1e-12;
};

struct PoincareResult {
  double constant = 0;   // best P; HUGE_VAL when infinite
  bool infinite = false;
  bool dense = true;     // solved by the dense path
  int iterations = 0;
};

// Best constant in  min_a sum_H (f-a)^2 phi mu  <=  P sum_{E(H*)} |grad f|^2 phi~ nu,
// over f : H* -> R. Pass phi/phi_edge = nullptr for unit weights. `domain` must
// be a subset of `energy`'s vertex set (matching region indices). Returns
// infinite when a function constant on each component of H* has positive
// weighted variance on the domain.
PoincareResult poincare_constant_full(const WeightedSubgraph& domain,
                                      const WeightedSubgraph& energy,
                                      const std::vector<double>* phi = nullptr,
                                      const std::vector<double>* phi_edge = nullptr,
                                      const PoincareOptions& opts = {});

double poincare_constant(const WeightedSubgraph& domain, const WeightedSubgraph& energy,
                         const std::vector<double>* phi = nullptr,
                         const std::vector<double>* phi_edge = nullptr,
                         const PoincareOptions& opts = {});

struct GoodnessConstants {
  double C_V = 1.0;
  double C_P = 1.0;
  double C_W = 1.0;
  double C_E = 1.0;
  double C_F = 8.0;
};

// Fitted defaults per (d, p); these are configuration parameters, not claims.
GoodnessConstants default_goodness_constants(int d, double p);

enum class GoodnessLevel { None, Good, VeryGood, ExceedinglyGood };

struct GoodnessReport {
  GoodnessLevel verdict = GoodnessLevel::None;
  GoodnessConstants constants;
  double N_B = 1;            // smallest admissible sub-ball scale found (>= 1)
  double scale_bound = 0;    // R^{1/(d+2)} (very good) or R1^{1/(10(d+2))}
  bool unreliable = false;   // enlarged ball clipped by the region boundary
  // plain good-check diagnostics
  double volume_mu = 0, poincare = 0, volume_required = 0, poincare_allowed = 0;
  // failure witness
  int64_t failing_center = -1;
  int64_t failing_radius = 0;
  std::string failure;  // "volume" | "poincare" | "scale" | "path" | ""
  std::vector<int64_t> radius_grid;
};

struct VeryGoodOptions {
  double grid_ratio = 1.25;
  int64_t exact_all_radii_max = 40;  // below this R, every radius is checked
  int threads = 0;
};

GoodnessReport classify_good(const BondConfig& cfg, const Box& region, int64_t x, int64_t r,
                             const GoodnessConstants& k, const PoincareOptions& popts = {});

GoodnessReport classify_very_good(const BondConfig& cfg, const Box& region, int64_t x,
                                  int64_t R, const GoodnessConstants& k,
                                  const VeryGoodOptions& vopts = {},
                                  const PoincareOptions& popts = {});

struct ExceedinglyGoodOptions {
  int pair_samples = 8;
  int r_samples = 3;
  uint64_t seed = 1;
  VeryGoodOptions vopts;
};

GoodnessReport classify_exceedingly_good(const BondConfig& cfg, const Box& region, int64_t x0,
                                         int64_t R1, const GoodnessConstants& k,
                                         const ExceedinglyGoodOptions& opts = {},
                                         const PoincareOptions& popts = {});

// Whitney-type cover of a chemical ball: greedy maximal-first packing of
// disjoint base balls with rho(y_i) = lambda s_i, down to the scale R_0 + 1,
// boundary balls below eta R_0 = 2(lambda + 2K) R_0 widened to components.
struct WhitneyBall {
  int64_t center = -1;     // region index
  double s = 0;            // base radius (real-valued)
  bool boundary = false;
  std::vector<int64_t> bprime;   // B'_i = B(y_i, 3 s_i)  (interior balls)
  std::vector<int64_t> bsecond;  // B''_i (boundary balls; else B(y_i, 10 s_i))
};

struct WhitneyCover {
  double lambda = 0, K = 0, R0 = 0;
  std::vector<WhitneyBall> balls;  // interior balls first, then boundary balls
  int M = 0;                       // balls[0..M) are interior
  bool disjoint_ok = false, cover_ok = false, sandwich_ok = false;
  int max_overlap = 0;             // multiplicity of { B(y_i, K s_i) }
  std::vector<std::vector<int32_t>> chain_F;      // F(i)
  std::vector<std::vector<int32_t>> chain_Fstar;  // F*(j)
};

WhitneyCover whitney_cover(const BondConfig& cfg, const Box& region, int64_t x0, int64_t R,
                           double lambda, double K, double R0);

struct BallWeight {
  std::vector<int64_t> verts;  // ball vertices, sorted region indices
  std::vector<int32_t> rho;    // distance to ball complement (large = interior)
  std::vector<double> phi;     // ((R ^ rho)/R)^2 per vertex
  // phi~ per open edge inside the ball, aligned with `edges`
  std::vector<std::array<int32_t, 2>> edges;
  std::vector<double> phi_edge;
};

BallWeight compute_weight(const BondConfig& cfg, const Box& region,
                          const std::vector<int64_t>& ball, int64_t R);

}  // namespace percwalk
