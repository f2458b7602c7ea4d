// SPDX-License-Identifier: Apache-2.0
#include "percwalk/geometry.hpp"

#include <algorithm>

namespace percwalk {

CubeEnlargement enlarge_cube(const Box& q, const Box* ambient) {
  int64_t n = q.min_side();
  auto build = [&](int64_t m, bool* clipped) {
    Coords l(q.lo), h(q.lo);
    for (int a = 0; a < q.dim(); ++a) {
      l[a] = q.lo[a] - (m - q.side(a)) / 2;
      h[a] = l[a] + m;
    }
    Box b(std::move(l), std::move(h));
    if (ambient != nullptr) {
      Box c = b.clipped_to(*ambient);
      *clipped = !(c == b);
      return c;
    }
    *clipped = false;
    return b;
  };
  CubeEnlargement e;
  e.plus = build((3 * n) / 2, &e.plus_clipped);
  e.oplus = build((6 * n) / 5, &e.oplus_clipped);
  return e;
}

Tiling tile(const Box& box, int64_t k) {
  if (k < 2) throw std::invalid_argument("tile: k must be >= 2");
  Tiling t;
  t.k = k;
  t.ambient = box;
  return t;
}

int64_t diameter(const Box& box, std::span<const int64_t> vertex_indices) {
  if (vertex_indices.empty()) throw std::invalid_argument("diameter: empty set");
  int d = box.dim();
  Coords cmin(d, INT64_MAX), cmax(d, INT64_MIN), c(d);
  for (int64_t idx : vertex_indices) {
    box.coords_of(idx, c.data());
    for (int a = 0; a < d; ++a) {
      cmin[a] = std::min(cmin[a], c[a]);
      cmax[a] = std::max(cmax[a], c[a]);
    }
  }
  int64_t diam = 0;
  for (int a = 0; a < d; ++a) diam = std::max(diam, cmax[a] - cmin[a]);
  return diam;
}

}  // namespace percwalk
