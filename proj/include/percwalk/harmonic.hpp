// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "percwalk/walk.hpp"

namespace percwalk {

// Dirichlet problem: L h = 0 on the ball, h fixed on the external boundary
// d_e B (the paper's closure B-bar = B ∪ d_e B).
struct HarmonicSolution {
  std::vector<int32_t> ball;      // graph-local interior vertices (sorted)
  std::vector<int32_t> boundary;  // graph-local d_e B (sorted)
  std::vector<double> h;          // over the whole graph; 0 off B-bar
  double residual = 0;            // max |Lh| over the interior
};

HarmonicSolution solve_dirichlet(const WalkGraph& g, const std::vector<int32_t>& ball,
                                 const std::vector<double>& boundary_values,
                                 double tol = 1e-12);

// sup h / inf h over the inner ball; requires positivity there
double harnack_ratio(const HarmonicSolution& sol, const std::vector<int32_t>& inner);

struct OscillationReport {
  std::vector<double> factors;  // Osc(h, B1) / Osc(h, B0) per boundary dataset
  double max_factor = 0;
  bool max_principle_ok = true;  // interior range within boundary range
};

// Ensemble of Dirichlet solves with i.i.d. uniform(0.1, 1.1) boundary data;
// B1 is the concentric half-radius ball.
OscillationReport oscillation_decay(const WalkGraph& g, int32_t center, int64_t R,
                                    int datasets, uint64_t seed);

// helper: vertices with d(x,.) < r and their external boundary in g
struct GraphBall {
  std::vector<int32_t> interior, boundary;
};
GraphBall graph_ball(const WalkGraph& g, int32_t center, int64_t r);

// Deterministic pendant-cube graph of Remark-4.10 type: an ambient slab with
// a side-R cube attached through a single bottleneck at graph distance ~s,
// plus the exp(-d(x0,.)/R)-weighted variance/energy ratio for f = 1_cube.
struct PendantCubeGraph {
  WalkGraph graph;
  int32_t x0 = 0;
  std::vector<int32_t> cube;  // pendant cube vertices (graph-local)
  double ratio = 0;           // min_a sum (f-a)^2 psi mu / (R^2 sum |grad f|^2 psi~ nu)
  double numerator = 0, denominator = 0;
};

PendantCubeGraph remark410_graph(int d, int64_t R, int64_t s);

}  // namespace percwalk
