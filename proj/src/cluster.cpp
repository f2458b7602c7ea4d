// SPDX-License-Identifier: Apache-2.0
#include "percwalk/cluster.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace percwalk {

namespace {

// Adapter over the two config kinds: "vertex open" and traversable nearest
// edges inside a working region. For bond configs a vertex is open iff it has
// an open incident edge inside the region; a nearest edge is traversable iff
// the bond is open. For site configs both endpoints must be open sites.
struct BondView {
  const BondConfig& cfg;
  const Box& region;

  bool vertex_open(std::span<const int64_t> c) const {
    Coords t(c.begin(), c.end());
    for (int a = 0; a < region.dim(); ++a) {
      if (c[a] < region.hi[a] && cfg.open(a, t)) return true;
      if (c[a] > region.lo[a]) {
        t[a] -= 1;
        bool o = cfg.open(a, t);
        t[a] += 1;
        if (o) return true;
      }
    }
    return false;
  }

  // neighbors along open edges; fn(neighbor coords mutated in-place)
  template <typename Fn>
  void for_neighbors(Coords& c, Fn&& fn) const {
    for (int a = 0; a < region.dim(); ++a) {
      if (c[a] < region.hi[a] && cfg.open(a, c)) {
        c[a] += 1;
        fn(c);
        c[a] -= 1;
      }
      if (c[a] > region.lo[a]) {
        c[a] -= 1;
        if (cfg.open(a, c)) fn(c);
        c[a] += 1;
      }
    }
  }
};

struct SiteView {
  const SiteConfig& cfg;
  const Box& region;
  Adjacency adjacency;

  bool vertex_open(std::span<const int64_t> c) const {
    return cfg.open(cfg.box.index_of(c));
  }

  template <typename Fn>
  void for_neighbors(Coords& c, Fn&& fn) const {
    if (adjacency == Adjacency::Nearest) {
      for (int a = 0; a < region.dim(); ++a) {
        for (int64_t dir : {int64_t(1), int64_t(-1)}) {
          c[a] += dir;
          if (c[a] >= region.lo[a] && c[a] <= region.hi[a] && vertex_open(c)) fn(c);
          c[a] -= dir;
        }
      }
    } else {
      star_rec(c, 0, false, fn);
    }
  }

 private:
  template <typename Fn>
  void star_rec(Coords& c, int a, bool moved, Fn&& fn) const {
    if (a == region.dim()) {
      if (moved && vertex_open(c)) fn(c);
      return;
    }
    star_rec(c, a + 1, moved, fn);
    for (int64_t dir : {int64_t(1), int64_t(-1)}) {
      c[a] += dir;
      if (c[a] >= region.lo[a] && c[a] <= region.hi[a]) star_rec(c, a + 1, true, fn);
      c[a] -= dir;
    }
  }
};

template <typename View>
ClusterLabeling label_impl(const View& view, const Box& region, Adjacency adjacency) {
  ClusterLabeling lab;
  lab.region = region;
  lab.adjacency = adjacency;
  int64_t n = region.vertex_count();
  lab.comp.assign(size_t(n), -1);

  Coords c(region.dim());
  std::deque<int64_t> queue;
  int64_t best_size = 0, best_min = 0;
  for (int64_t v = 0; v < n; ++v) {
    if (lab.comp[size_t(v)] != -1) continue;
    region.coords_of(v, c.data());
    if (!view.vertex_open(c)) continue;
    // v is the lexicographically smallest vertex of its component
    int32_t id = int32_t(lab.comp_size.size());
    lab.comp[size_t(v)] = id;
    int64_t size = 0;
    queue.push_back(v);
    while (!queue.empty()) {
      int64_t u = queue.front();
      queue.pop_front();
      ++size;
      region.coords_of(u, c.data());
      view.for_neighbors(c, [&](const Coords& nb) {
        int64_t w = region.index_of(nb);
        if (lab.comp[size_t(w)] == -1) {
          lab.comp[size_t(w)] = id;
          queue.push_back(w);
        }
      });
    }
    lab.comp_size.push_back(size);
    lab.comp_min_vertex.push_back(v);
    if (size > best_size) {
      best_size = size;
      best_min = v;
      lab.largest = id;
    }
    // ties keep the earlier component, which has the smaller minimal vertex
  }
  (void)best_min;
  return lab;
}

}  // namespace

ClusterLabeling label_clusters(const BondConfig& cfg, const Box& region, Adjacency adjacency) {
  if (adjacency == Adjacency::Star)
    throw std::invalid_argument("label_clusters: star adjacency is defined only for site configs");
  if (!cfg.box.contains(region))
    throw std::invalid_argument("label_clusters: region not inside config box");
  return label_impl(BondView{cfg, region}, region, adjacency);
}

ClusterLabeling label_clusters(const SiteConfig& cfg, const Box& region, Adjacency adjacency) {
  if (!cfg.box.contains(region))
    throw std::invalid_argument("label_clusters: region not inside config box");
  return label_impl(SiteView{cfg, region, adjacency}, region, adjacency);
}

std::vector<int64_t> largest_cluster(const ClusterLabeling& lab) {
  return component_vertices(lab, lab.largest);
}

std::vector<int64_t> component_vertices(const ClusterLabeling& lab, int32_t comp) {
  std::vector<int64_t> out;
  if (comp < 0) return out;
  out.reserve(size_t(lab.comp_size[size_t(comp)]));
  for (int64_t v = 0; v < int64_t(lab.comp.size()); ++v)
    if (lab.comp[size_t(v)] == comp) out.push_back(v);
  return out;
}

namespace {

template <typename View>
bool crossing_impl(const View& view, const Box& region, const std::vector<int64_t>& cluster,
                   const Box& qprime, CrossingReport* report) {
  int d = region.dim();
  CrossingReport local;
  local.axis_crossed.assign(size_t(d), false);
  for (int a = 0; a < d; ++a)
    if (qprime.side(a) == 0) local.degenerate = true;

  // membership mask over region, restricted to q'
  std::vector<uint8_t> in_cluster(size_t(region.vertex_count()), 0);
  std::vector<int64_t> inside;
  Coords c(d);
  for (int64_t v : cluster) {
    region.coords_of(v, c.data());
    if (qprime.contains(c)) {
      in_cluster[size_t(v)] = 1;
      inside.push_back(v);
    }
  }
  if (inside.empty()) {
    if (report) *report = local;
    return false;
  }

  // components of cluster ∩ Q' and their per-axis extents
  std::vector<uint8_t> seen(in_cluster.size(), 0);
  std::deque<int64_t> queue;
  for (int64_t s : inside) {
    if (seen[size_t(s)]) continue;
    seen[size_t(s)] = 1;
    Coords cmin(size_t(d), 0), cmax(size_t(d), 0);
    region.coords_of(s, cmin.data());
    cmax = cmin;
    queue.push_back(s);
    while (!queue.empty()) {
      int64_t u = queue.front();
      queue.pop_front();
      region.coords_of(u, c.data());
      for (int a = 0; a < d; ++a) {
        cmin[a] = std::min(cmin[a], c[a]);
        cmax[a] = std::max(cmax[a], c[a]);
      }
      view.for_neighbors(c, [&](const Coords& nb) {
        if (!qprime.contains(nb)) return;
        int64_t w = region.index_of(nb);
        if (in_cluster[size_t(w)] && !seen[size_t(w)]) {
          seen[size_t(w)] = 1;
          queue.push_back(w);
        }
      });
    }
    for (int a = 0; a < d; ++a)
      if (cmin[a] == qprime.lo[a] && cmax[a] == qprime.hi[a]) local.axis_crossed[size_t(a)] = true;
  }
  for (int a = 0; a < d; ++a)
    if (qprime.side(a) == 0) local.axis_crossed[size_t(a)] = true;  // vacuous

  bool all = true;
  for (int a = 0; a < d; ++a) all = all && local.axis_crossed[size_t(a)];
  if (report) *report = local;
  return all;
}

}  // namespace

bool is_crossing(const BondConfig& cfg, const Box& region, const std::vector<int64_t>& cluster,
                 const Box& qprime, CrossingReport* report) {
  return crossing_impl(BondView{cfg, region}, region, cluster, qprime, report);
}

bool is_crossing(const SiteConfig& cfg, const Box& region, const std::vector<int64_t>& cluster,
                 const Box& qprime, CrossingReport* report) {
  return crossing_impl(SiteView{cfg, region, Adjacency::Nearest}, region, cluster, qprime, report);
}

BoundarySets boundary_sets(const Box& region, const std::vector<int64_t>& A, const Box& Q) {
  std::vector<uint8_t> inA(size_t(region.vertex_count()), 0);
  for (int64_t v : A) inA[size_t(v)] = 1;
  std::vector<uint8_t> ext(inA.size(), 0);
  BoundarySets out;
  Coords c(region.dim());
  for (int64_t v : A) {
    region.coords_of(v, c.data());
    if (!Q.contains(c)) throw std::invalid_argument("boundary_sets: A not inside Q");
    bool internal = false;
    for (int a = 0; a < region.dim(); ++a) {
      for (int64_t dir : {int64_t(1), int64_t(-1)}) {
        c[a] += dir;
        if (Q.contains(c) && region.contains(c)) {
          int64_t w = region.index_of(c);
          if (!inA[size_t(w)]) {
            internal = true;
            if (!ext[size_t(w)]) {
              ext[size_t(w)] = 1;
              out.external_.push_back(w);
            }
          }
        }
        c[a] -= dir;
      }
    }
    if (internal) out.internal_.push_back(v);
  }
  std::sort(out.internal_.begin(), out.internal_.end());
  std::sort(out.external_.begin(), out.external_.end());
  return out;
}

namespace {

template <typename OpenFn>
int64_t edge_boundary_impl(const Box& region, const std::vector<int64_t>& A1,
                           const std::vector<int64_t>& A2, OpenFn&& edge_ok) {
  std::vector<uint8_t> m1(size_t(region.vertex_count()), 0), m2(m1.size(), 0);
  for (int64_t v : A1) m1[size_t(v)] = 1;
  for (int64_t v : A2) m2[size_t(v)] = 1;
  // iterate unordered nearest edges once (positive axis direction)
  std::vector<int64_t> touched(A1);
  touched.insert(touched.end(), A2.begin(), A2.end());
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  int64_t count = 0;
  Coords c(region.dim());
  for (int64_t v : touched) {
    region.coords_of(v, c.data());
    for (int a = 0; a < region.dim(); ++a) {
      if (c[a] >= region.hi[a]) continue;
      if (!edge_ok(a, c)) continue;
      c[a] += 1;
      int64_t w = region.index_of(c);
      c[a] -= 1;
      if ((m1[size_t(v)] && m2[size_t(w)]) || (m1[size_t(w)] && m2[size_t(v)])) ++count;
    }
  }
  return count;
}

}  // namespace

int64_t edge_boundary_count(const Box& region, const std::vector<int64_t>& A1,
                            const std::vector<int64_t>& A2) {
  return edge_boundary_impl(region, A1, A2, [](int, const Coords&) { return true; });
}

int64_t edge_boundary_count_open(const BondConfig& cfg, const Box& region,
                                 const std::vector<int64_t>& A1,
                                 const std::vector<int64_t>& A2) {
  return edge_boundary_impl(region, A1, A2,
                            [&](int a, const Coords& c) { return cfg.open(a, c); });
}

std::vector<int32_t> bfs_distances(const BondConfig& cfg, const Box& region,
                                   const std::vector<int64_t>& sources, int64_t max_dist) {
  BondView view{cfg, region};
  std::vector<int32_t> dist(size_t(region.vertex_count()), kDistInf);
  std::deque<int64_t> queue;
  Coords c(region.dim());
  for (int64_t s : sources) {
    region.coords_of(s, c.data());
    if (view.vertex_open(c) && dist[size_t(s)] != 0) {
      dist[size_t(s)] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    int64_t u = queue.front();
    queue.pop_front();
    int32_t du = dist[size_t(u)];
    if (max_dist >= 0 && du >= max_dist) continue;
    region.coords_of(u, c.data());
    view.for_neighbors(c, [&](const Coords& nb) {
      int64_t w = region.index_of(nb);
      if (dist[size_t(w)] == kDistInf) {
        dist[size_t(w)] = du + 1;
        queue.push_back(w);
      }
    });
  }
  return dist;
}

int64_t chemical_distance(const BondConfig& cfg, const Box& region, int64_t x, int64_t y) {
  // BFS from x; early exit once y is reached
  BondView view{cfg, region};
  Coords c(region.dim());
  region.coords_of(x, c.data());
  if (!view.vertex_open(c)) return kDistInf;
  if (x == y) return 0;
  std::vector<int32_t> dist(size_t(region.vertex_count()), kDistInf);
  dist[size_t(x)] = 0;
  std::deque<int64_t> queue{x};
  while (!queue.empty()) {
    int64_t u = queue.front();
    queue.pop_front();
    region.coords_of(u, c.data());
    int32_t du = dist[size_t(u)];
    bool found = false;
    view.for_neighbors(c, [&](const Coords& nb) {
      int64_t w = region.index_of(nb);
      if (dist[size_t(w)] == kDistInf) {
        dist[size_t(w)] = du + 1;
        if (w == y) found = true;
        queue.push_back(w);
      }
    });
    if (found) return dist[size_t(y)];
  }
  return kDistInf;
}

ChemicalBall chemical_ball(const BondConfig& cfg, const Box& region, int64_t x, int64_t r) {
  BondView view{cfg, region};
  Coords c(region.dim());
  region.coords_of(x, c.data());
  if (!view.vertex_open(c))
    throw std::invalid_argument("chemical_ball: center is not an open vertex");
  ChemicalBall ball;
  ball.center = x;
  ball.radius = r;
  auto dist = bfs_distances(cfg, region, {x}, r - 1);
  for (int64_t v = 0; v < int64_t(dist.size()); ++v) {
    if (dist[size_t(v)] != kDistInf && dist[size_t(v)] < r) {
      ball.verts.push_back(v);
      ball.dist.push_back(dist[size_t(v)]);
    }
  }
  return ball;
}

double WeightedSubgraph::mu_total() const {
  double s = 0;
  for (double m : mu) s += m;
  return s;
}

double WeightedSubgraph::mu0_total() const {
  double s = 0;
  for (double m : mu0) s += m;
  return s;
}

int32_t WeightedSubgraph::local_of(int64_t region_idx) const {
  auto it = std::lower_bound(verts.begin(), verts.end(), region_idx);
  if (it == verts.end() || *it != region_idx) return -1;
  return int32_t(it - verts.begin());
}

bool WeightedSubgraph::connected() const {
  if (verts.empty()) return true;
  std::vector<uint8_t> seen(verts.size(), 0);
  std::deque<int32_t> queue{0};
  seen[0] = 1;
  size_t count = 0;
  while (!queue.empty()) {
    int32_t u = queue.front();
    queue.pop_front();
    ++count;
    for (int32_t w : adj[size_t(u)]) {
      if (!seen[size_t(w)]) {
        seen[size_t(w)] = 1;
        queue.push_back(w);
      }
    }
  }
  return count == verts.size();
}

WeightedSubgraph induced_graph(const BondConfig& cfg, const Box& region,
                               const std::vector<int64_t>& H) {
  WeightedSubgraph g;
  g.region = region;
  g.verts = H;
  std::sort(g.verts.begin(), g.verts.end());
  g.verts.erase(std::unique(g.verts.begin(), g.verts.end()), g.verts.end());
  size_t n = g.verts.size();
  g.mu.assign(n, 0);
  g.mu0.assign(n, 0);
  g.adj.assign(n, {});
  Coords c(region.dim());
  for (size_t i = 0; i < n; ++i) {
    region.coords_of(g.verts[i], c.data());
    g.mu[i] = cfg.open_degree(c);  // ambient open degree
    for (int a = 0; a < region.dim(); ++a) {
      if (c[a] >= region.hi[a] || !cfg.open(a, c)) continue;
      c[a] += 1;
      int32_t j = g.local_of(region.index_of(c));
      c[a] -= 1;
      if (j < 0) continue;
      g.edges.push_back({int32_t(i), j});
      g.adj[i].push_back(j);
      g.adj[size_t(j)].push_back(int32_t(i));
    }
  }
  for (size_t i = 0; i < n; ++i) g.mu0[i] = double(g.adj[i].size());
  return g;
}

WeightedSubgraph make_subgraph(const Box& region, std::vector<int64_t> verts,
                               std::vector<std::array<int32_t, 2>> edges) {
  WeightedSubgraph g;
  g.region = region;
  g.verts = std::move(verts);
  g.edges = std::move(edges);
  size_t n = g.verts.size();
  g.adj.assign(n, {});
  for (auto& e : g.edges) {
    g.adj[size_t(e[0])].push_back(e[1]);
    g.adj[size_t(e[1])].push_back(e[0]);
  }
  g.mu0.assign(n, 0);
  for (size_t i = 0; i < n; ++i) g.mu0[i] = double(g.adj[i].size());
  g.mu = g.mu0;
  return g;
}

}  // namespace percwalk
