// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace percwalk {

using Coords = std::vector<int64_t>;

// Axis-aligned box of lattice vertices with closed integer ranges.
// "side n" means hi - lo = n, i.e. n+1 vertices per axis.
struct Box {
  Coords lo, hi;

  Box() = default;
  Box(Coords lo_, Coords hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) throw std::invalid_argument("Box: lo/hi rank mismatch");
    for (size_t i = 0; i < lo.size(); ++i)
      if (hi[i] < lo[i]) throw std::invalid_argument("Box: hi < lo");
  }

  static Box cube(Coords corner, int64_t side) {
    Coords h(corner);
    for (auto& v : h) v += side;
    return Box(std::move(corner), std::move(h));
  }

  static Box centered_cube(int dim, int64_t side) {
    Coords l(dim, -(side / 2));
    return cube(std::move(l), side);
  }

  int dim() const { return int(lo.size()); }
  int64_t extent(int a) const { return hi[a] - lo[a] + 1; }
  int64_t side(int a) const { return hi[a] - lo[a]; }

  // minimal side over axes; for cubes this is s(Q)
  int64_t min_side() const {
    int64_t s = side(0);
    for (int a = 1; a < dim(); ++a) s = std::min(s, side(a));
    return s;
  }

  int64_t vertex_count() const {
    int64_t n = 1;
    for (int a = 0; a < dim(); ++a) n *= extent(a);
    return n;
  }

  bool contains(std::span<const int64_t> c) const {
    for (int a = 0; a < dim(); ++a)
      if (c[a] < lo[a] || c[a] > hi[a]) return false;
    return true;
  }

  bool contains(const Box& other) const {
    for (int a = 0; a < dim(); ++a)
      if (other.lo[a] < lo[a] || other.hi[a] > hi[a]) return false;
    return true;
  }

  bool intersects(const Box& other) const {
    for (int a = 0; a < dim(); ++a)
      if (other.hi[a] < lo[a] || other.lo[a] > hi[a]) return false;
    return true;
  }

  Box clipped_to(const Box& ambient) const {
    Coords l(lo), h(hi);
    for (int a = 0; a < dim(); ++a) {
      l[a] = std::max(l[a], ambient.lo[a]);
      h[a] = std::min(h[a], ambient.hi[a]);
      if (h[a] < l[a]) throw std::invalid_argument("Box::clipped_to: empty intersection");
    }
    return Box(std::move(l), std::move(h));
  }

  // Lexicographic index: axis 0 most significant, so index order equals
  // lexicographic coordinate order.
  int64_t index_of(std::span<const int64_t> c) const {
    int64_t idx = 0;
    for (int a = 0; a < dim(); ++a) idx = idx * extent(a) + (c[a] - lo[a]);
    return idx;
  }

  void coords_of(int64_t idx, int64_t* out) const {
    for (int a = dim() - 1; a >= 0; --a) {
      int64_t e = extent(a);
      out[a] = lo[a] + idx % e;
      idx /= e;
    }
  }

  Coords coords_of(int64_t idx) const {
    Coords c(dim());
    coords_of(idx, c.data());
    return c;
  }

  bool operator==(const Box& o) const { return lo == o.lo && hi == o.hi; }
};

struct CubeEnlargement {
  Box plus;    // Q^+, side floor(3n/2)
  Box oplus;   // Q^o+, side floor(6n/5)
  bool plus_clipped = false;
  bool oplus_clipped = false;
};

// Q^+ and Q^o+ share Q's center; integer rounding places Q at the center of
// the enlarged cube with the extra width split as evenly as possible (floor
// on the low side), which keeps Q contained in Q^o+ contained in Q^+.
CubeEnlargement enlarge_cube(const Box& q, const Box* ambient = nullptr);

// Tiling of Z^d by cubes T(x~) = { y : k x~_i <= y_i < k (x~_i + 1) },
// anchored at the origin; each tile has side k-1 (k vertices per axis).
struct Tiling {
  int64_t k = 0;
  Box ambient;

  // tile of a given tile index, unclipped
  Box tile(std::span<const int64_t> tile_index) const {
    Coords l(tile_index.size()), h(tile_index.size());
    for (size_t a = 0; a < tile_index.size(); ++a) {
      l[a] = k * tile_index[a];
      h[a] = l[a] + (k - 1);
    }
    return Box(std::move(l), std::move(h));
  }

  void tile_of(std::span<const int64_t> vertex, int64_t* tile_index) const {
    for (size_t a = 0; a < vertex.size(); ++a) {
      int64_t v = vertex[a];
      tile_index[a] = (v >= 0) ? v / k : -((-v + k - 1) / k);
    }
  }

  // box of tile indices whose tiles intersect the ambient box
  Box index_range() const {
    Coords l(ambient.dim()), h(ambient.dim());
    tile_of(ambient.lo, l.data());
    tile_of(ambient.hi, h.data());
    return Box(std::move(l), std::move(h));
  }
};

Tiling tile(const Box& box, int64_t k);

// L-infinity diameter of a vertex set, from per-axis extents.
int64_t diameter(const Box& box, std::span<const int64_t> vertex_indices);

}  // namespace percwalk
