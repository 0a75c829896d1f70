#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <unordered_map>
#include <vector>

#include "csv.hpp"
#include "errors.hpp"
#include "point_process.hpp"
#include "predicates.hpp"

namespace ppnav {

struct Triangulation {
  std::vector<Vec<2>> points;
  // Counter-clockwise triangles; see sorted_triangles() for the canonical form.
  std::vector<std::array<std::size_t, 3>> triangles;
  std::vector<std::vector<std::size_t>> adjacency;
  std::vector<std::size_t> hull;  // counter-clockwise hull vertices

  std::size_t size() const { return points.size(); }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency.at(i); }
  bool on_hull(std::size_t i) const { return hull_flag_.at(i); }

  // Each row sorted ascending, rows sorted lexicographically.
  std::vector<std::array<std::size_t, 3>> sorted_triangles() const {
    auto t = triangles;
    for (auto& tri : t) std::sort(tri.begin(), tri.end());
    std::sort(t.begin(), t.end());
    return t;
  }

  std::vector<bool> hull_flag_;
};

namespace detail {

class EdgeMap {
 public:
  explicit EdgeMap(std::size_t n) { m_.reserve(6 * n + 16); }
  static std::uint64_t key(std::size_t u, std::size_t v) { return (std::uint64_t(u) << 32) | std::uint64_t(v); }
  void add_tri(std::size_t a, std::size_t b, std::size_t c) {
    m_[key(a, b)] = c;
    m_[key(b, c)] = a;
    m_[key(c, a)] = b;
  }
  void remove_tri(std::size_t a, std::size_t b, std::size_t c) {
    m_.erase(key(a, b));
    m_.erase(key(b, c));
    m_.erase(key(c, a));
  }
  // Vertex opposite directed edge u->v, or npos.
  std::size_t opp(std::size_t u, std::size_t v) const {
    auto it = m_.find(key(u, v));
    return it == m_.end() ? npos : it->second;
  }
  const auto& raw() const { return m_; }
  static constexpr std::size_t npos = std::size_t(-1);

 private:
  std::unordered_map<std::uint64_t, std::size_t> m_;
};

}  // namespace detail

// Delaunay triangulation by a lexicographic sweep followed by Lawson flips.
// Cocircular quadrilaterals keep the diagonal that contains the lowest index,
// which is the triangulation of a consistent symbolic perturbation, so the
// result does not depend on insertion order.
inline Triangulation triangulate(std::span<const Vec<2>> pts) {
  const std::size_t n = pts.size();
  require(n < (std::size_t(1) << 32), "too many points for triangulation");
  require(n >= 3, "triangulation needs at least 3 points");
  for (const auto& p : pts) require(all_finite(p), "non-finite point");
  std::vector<std::size_t> ord(n);
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
    return pts[a] < pts[b] || (pts[a] == pts[b] && a < b);
  });
  for (std::size_t i = 1; i < n; ++i)
    if (pts[ord[i]] == pts[ord[i - 1]]) throw InputError("degenerate input: duplicate points");

  auto P = [&](std::size_t i) -> const Vec<2>& { return pts[i]; };
  auto orient = [&](std::size_t a, std::size_t b, std::size_t c) { return geom::orient(P(a), P(b), P(c)); };

  std::size_t k = 2;
  while (k < n && orient(ord[0], ord[1], ord[k]) == 0) ++k;
  if (k == n) throw InputError("degenerate input: all points collinear");

  detail::EdgeMap em(n);
  std::vector<std::size_t> next(n, detail::EdgeMap::npos), prev(n, detail::EdgeMap::npos);
  const std::size_t apex = ord[k];
  // Fan over the sorted collinear run ord[0..k-1].
  const int side = orient(ord[0], ord[1], apex);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const std::size_t a = ord[i], b = ord[i + 1];
    if (side > 0) em.add_tri(a, b, apex);
    else em.add_tri(b, a, apex);
  }
  // Hull ring: the run on one side, apex on the other.
  std::vector<std::size_t> ring;
  if (side > 0) {
    for (std::size_t i = 0; i < k; ++i) ring.push_back(ord[i]);
    ring.push_back(apex);
  } else {
    ring.push_back(apex);
    for (std::size_t i = 0; i < k; ++i) ring.push_back(ord[k - 1 - i]);
  }
  for (std::size_t i = 0; i < ring.size(); ++i) {
    next[ring[i]] = ring[(i + 1) % ring.size()];
    prev[ring[(i + 1) % ring.size()]] = ring[i];
  }

  std::size_t last = apex;
  std::vector<std::size_t> hull_vertices(ring.begin(), ring.end());
  for (std::size_t s = k + 1; s < n; ++s) {
    const std::size_t p = ord[s];
    std::size_t start = last;
    auto visible_from = [&](std::size_t v) {
      return orient(v, next[v], p) < 0 || orient(prev[v], v, p) < 0;
    };
    if (!visible_from(start)) {
      // Not expected for a lexicographic sweep; scan the hull as a fallback.
      std::size_t v = next[start];
      while (v != start && !visible_from(v)) v = next[v];
      if (v == start) throw InputError("degenerate input: sweep lost the hull");
      start = v;
    }
    std::size_t r = start;
    while (orient(r, next[r], p) < 0) {
      em.add_tri(next[r], r, p);
      r = next[r];
    }
    std::size_t l = start;
    while (orient(prev[l], l, p) < 0) {
      em.add_tri(l, prev[l], p);
      l = prev[l];
    }
    next[l] = p;
    prev[p] = l;
    next[p] = r;
    prev[r] = p;
    last = p;
  }

  // Lawson flips.
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  stack.reserve(em.raw().size());
  for (const auto& [key, w] : em.raw()) {
    const std::size_t u = std::size_t(key >> 32), v = std::size_t(key & 0xFFFFFFFFu);
    if (u < v) stack.emplace_back(u, v);
  }
  std::sort(stack.begin(), stack.end());
  auto illegal = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    // triangle (a,b,c) ccw, d opposite across edge ab
    const int s = geom::incircle(P(a), P(b), P(c), P(d));
    if (s != 0) return s > 0;
    const std::size_t lowest = std::min({a, b, c, d});
    return lowest == c || lowest == d;
  };
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    const std::size_t c = em.opp(a, b), d = em.opp(b, a);
    if (c == detail::EdgeMap::npos || d == detail::EdgeMap::npos) continue;
    if (!illegal(a, b, c, d)) continue;
    em.remove_tri(a, b, c);
    em.remove_tri(b, a, d);
    em.add_tri(a, d, c);
    em.add_tri(b, c, d);
    stack.emplace_back(a, d);
    stack.emplace_back(d, b);
    stack.emplace_back(b, c);
    stack.emplace_back(c, a);
  }

  Triangulation T;
  T.points.assign(pts.begin(), pts.end());
  T.adjacency.assign(n, {});
  T.hull_flag_.assign(n, false);
  for (const auto& [key, w] : em.raw()) {
    const std::size_t u = std::size_t(key >> 32), v = std::size_t(key & 0xFFFFFFFFu);
    if (u < v && u < w) T.triangles.push_back({u, v, w});
    T.adjacency[u].push_back(v);
    if (em.opp(v, u) == detail::EdgeMap::npos) T.adjacency[v].push_back(u);
  }
  for (auto& a : T.adjacency) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  std::sort(T.triangles.begin(), T.triangles.end());
  // Hull from the final ring, starting at the lexicographically smallest point.
  std::size_t h = ord[0];
  do {
    T.hull.push_back(h);
    T.hull_flag_[h] = true;
    h = next[h];
  } while (h != ord[0]);
  return T;
}

template <std::size_t D>
Triangulation triangulate(const PointSet<D>& ps) {
  static_assert(D == 2, "Delaunay triangulation is planar only");
  return triangulate(std::span<const Vec<2>>(ps.points));
}

inline const std::vector<std::size_t>& delaunay_neighbors(const Triangulation& t, std::size_t i) {
  require(i < t.size(), "point index out of range");
  return t.adjacency[i];
}

inline void write_triangles_csv(std::ostream& os, const Triangulation& t) {
  CsvWriter w(os);
  w.field("i").field("j").field("k");
  w.end_row();
  for (const auto& tri : t.sorted_triangles()) {
    for (auto v : tri) w.field(v);
    w.end_row();
  }
}

}  // namespace ppnav
