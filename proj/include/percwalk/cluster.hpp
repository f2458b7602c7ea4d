// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "percwalk/config.hpp"
#include "percwalk/geometry.hpp"

namespace percwalk {

// Vertex sets in this module are vectors of indices into an explicitly named
// Box (usually the labeling region); index order is lexicographic in the
// coordinates, so "lexicographically smallest vertex" == smallest index.

constexpr int32_t kDistInf = std::numeric_limits<int32_t>::max();

enum class Adjacency { Nearest, Star };

struct ClusterLabeling {
  Box region;
  Adjacency adjacency = Adjacency::Nearest;
  std::vector<int32_t> comp;             // per region vertex; -1 = closed
  std::vector<int64_t> comp_size;        // per component id
  std::vector<int64_t> comp_min_vertex;  // per component id, region index
  int32_t largest = -1;  // max size, ties to the smaller minimal vertex

  int64_t open_count() const {
    int64_t n = 0;
    for (int64_t s : comp_size) n += s;
    return n;
  }
};

// For bond configs a vertex is open iff it has at least one open incident
// edge inside the region; star adjacency is defined only for site configs.
ClusterLabeling label_clusters(const BondConfig& cfg, const Box& region,
                               Adjacency adjacency = Adjacency::Nearest);
ClusterLabeling label_clusters(const SiteConfig& cfg, const Box& region,
                               Adjacency adjacency = Adjacency::Nearest);

// Vertices of C^v, sorted; empty when the region has no open vertex.
std::vector<int64_t> largest_cluster(const ClusterLabeling& labeling);
std::vector<int64_t> component_vertices(const ClusterLabeling& labeling, int32_t comp);

struct CrossingReport {
  std::vector<bool> axis_crossed;
  bool degenerate = false;  // some axis of Q' has side 0 (vacuous)
};

// True iff for every axis some connected component of cluster ∩ Q' contains
// an open path joining the two opposing faces of Q'.
bool is_crossing(const BondConfig& cfg, const Box& region,
                 const std::vector<int64_t>& cluster, const Box& qprime,
                 CrossingReport* report = nullptr);
bool is_crossing(const SiteConfig& cfg, const Box& region,
                 const std::vector<int64_t>& cluster, const Box& qprime,
                 CrossingReport* report = nullptr);

struct BoundarySets {
  std::vector<int64_t> internal_;  // d_i(A|Q)
  std::vector<int64_t> external_;  // d_e(A|Q)
};

BoundarySets boundary_sets(const Box& region, const std::vector<int64_t>& A, const Box& Q);

// d_E(A1, A2): nearest-neighbor edges with one endpoint in each set.
int64_t edge_boundary_count(const Box& region, const std::vector<int64_t>& A1,
                            const std::vector<int64_t>& A2);
// restricted to open edges of the configuration (the paper's d_E(.|O_E))
int64_t edge_boundary_count_open(const BondConfig& cfg, const Box& region,
                                 const std::vector<int64_t>& A1,
                                 const std::vector<int64_t>& A2);

// BFS distances along open edges from the source set, restricted to region;
// kDistInf where unreachable. `max_dist` prunes the search when >= 0.
std::vector<int32_t> bfs_distances(const BondConfig& cfg, const Box& region,
                                   const std::vector<int64_t>& sources,
                                   int64_t max_dist = -1);

// Shortest open-path length within region, kDistInf when disconnected.
// d(x,x) = 0 when x is open (has an open incident edge in region), else inf.
int64_t chemical_distance(const BondConfig& cfg, const Box& region, int64_t x, int64_t y);

struct ChemicalBall {
  int64_t center = -1;
  int64_t radius = 0;
  std::vector<int64_t> verts;  // region indices, sorted; d(center, v) < radius
  std::vector<int32_t> dist;   // aligned with verts
};

ChemicalBall chemical_ball(const BondConfig& cfg, const Box& region, int64_t x, int64_t r);

// Induced weighted subgraph on H: nu = 1 on open edges inside H, mu = open
// degree in the ambient configuration, mu0 = open degree within H.
struct WeightedSubgraph {
  Box region;
  std::vector<int64_t> verts;  // region indices, sorted
  std::vector<double> mu, mu0;
  std::vector<std::array<int32_t, 2>> edges;  // local ids
  std::vector<std::vector<int32_t>> adj;      // local adjacency

  int32_t n() const { return int32_t(verts.size()); }
  double mu_total() const;
  double mu0_total() const;
  int32_t local_of(int64_t region_idx) const;  // -1 if absent
  bool connected() const;
};

WeightedSubgraph induced_graph(const BondConfig& cfg, const Box& region,
                               const std::vector<int64_t>& H);

// Hand-built subgraph (unit edges); mu defaults to within-graph degree.
WeightedSubgraph make_subgraph(const Box& region, std::vector<int64_t> verts,
                               std::vector<std::array<int32_t, 2>> edges);

}  // namespace percwalk
