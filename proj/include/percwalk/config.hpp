// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "percwalk/geometry.hpp"

namespace percwalk {

// Packed bit array; bit order is frozen by the snapshot format.
struct BitArray {
  int64_t count = 0;
  std::vector<uint64_t> words;

  void resize(int64_t n) {
    count = n;
    words.assign(size_t((n + 63) / 64), 0);
  }
  bool get(int64_t i) const { return (words[size_t(i >> 6)] >> (i & 63)) & 1; }
  void set(int64_t i, bool v) {
    uint64_t m = uint64_t(1) << (i & 63);
    if (v)
      words[size_t(i >> 6)] |= m;
    else
      words[size_t(i >> 6)] &= ~m;
  }
  int64_t popcount() const {
    int64_t n = 0;
    for (uint64_t w : words) n += __builtin_popcountll(w);
    return n;
  }
  bool operator==(const BitArray& o) const = default;
};

// Canonical axis-major edge indexing of the nearest-neighbor edges of a box:
// all axis-0 edges (ordered by tail vertex within the axis-reduced box), then
// axis-1 edges, and so on.
struct EdgeIndexer {
  Box box;
  std::vector<int64_t> axis_offset;  // size d+1, prefix sums of per-axis counts

  EdgeIndexer() = default;
  explicit EdgeIndexer(const Box& b) : box(b) {
    int d = b.dim();
    axis_offset.assign(size_t(d) + 1, 0);
    for (int a = 0; a < d; ++a) {
      int64_t n = b.extent(a) > 1 ? b.vertex_count() / b.extent(a) * (b.extent(a) - 1) : 0;
      axis_offset[size_t(a) + 1] = axis_offset[size_t(a)] + n;
    }
  }

  int64_t edge_count() const { return axis_offset.back(); }

  // edge from tail vertex (coords) along +axis
  int64_t index(int axis, std::span<const int64_t> tail) const {
    int64_t idx = 0;
    for (int a = 0; a < box.dim(); ++a) {
      int64_t e = box.extent(a) - (a == axis ? 1 : 0);
      idx = idx * e + (tail[a] - box.lo[a]);
    }
    return axis_offset[size_t(axis)] + idx;
  }
};

enum class ConfigKind : uint16_t { Bond = 0, Site = 1 };

// Bond percolation state on a finite box. Regeneration from (box, p, seed)
// is bit-identical; edges are keyed by their canonical index so sampling is
// order- and thread-independent, and the per-edge uniforms couple the open
// sets monotonically across p.
struct BondConfig {
  Box box;
  double p = 0;
  uint64_t seed = 0;
  EdgeIndexer edges;
  BitArray bits;

  bool open(int64_t edge_idx) const { return bits.get(edge_idx); }

  // edge along +axis from tail coords; tail must satisfy tail[axis] < hi[axis]
  bool open(int axis, std::span<const int64_t> tail) const {
    return bits.get(edges.index(axis, tail));
  }

  int open_degree(std::span<const int64_t> vertex) const;
};

struct SiteConfig {
  Box box;
  double q = 0;
  uint64_t seed = 0;
  BitArray bits;  // one per vertex, canonical vertex index order

  bool open(int64_t vertex_idx) const { return bits.get(vertex_idx); }
};

BondConfig sample_bond_config(const Box& box, double p, uint64_t seed);
SiteConfig sample_site_config(const Box& box, double q, uint64_t seed);

// Construct directly from bits (macroscopic fields, hand-built tests).
BondConfig make_bond_config(const Box& box, BitArray bits, double p_nominal = 0,
                            uint64_t seed_nominal = 0);
SiteConfig make_site_field(const Box& box, BitArray bits, double q_nominal = 0,
                           uint64_t seed_nominal = 0);

// Shifted open set O_sigma = { x - sigma : x in O }; sigma in {0} or {+-e_i}.
// Sites whose preimage x + sigma falls outside the box become closed.
SiteConfig shift_sites(const SiteConfig& cfg, std::span<const int64_t> sigma);

// Snapshot file: "PCLB" magic, version, kind, d, per-axis lo/hi, p, seed,
// bit count, packed bits, all little-endian.
void save_snapshot(const BondConfig& cfg, const std::string& path);
void save_snapshot(const SiteConfig& cfg, const std::string& path);
BondConfig load_bond_snapshot(const std::string& path);
SiteConfig load_site_snapshot(const std::string& path);

}  // namespace percwalk
