#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "errors.hpp"
#include "navigators.hpp"
#include "parallel.hpp"

namespace ppnav {

// Navigation tree over a point set: parent[i] = A(X_i), root O with parent[root] = root.
struct NavTree {
  std::size_t root = npos;
  std::vector<std::size_t> parent;
  std::vector<std::size_t> h;  // hop count H(X_i)

  std::size_t size() const { return parent.size(); }
  std::size_t max_h() const { return h.empty() ? 0 : *std::max_element(h.begin(), h.end()); }
};

// Builds the tree from a parent rule evaluated independently per node (in
// parallel when threads > 1); hop counts then follow by memoized chain walks.
// The result is identical to a sequential build.
template <class ParentFn>
NavTree build_tree(std::size_t n, std::size_t root, ParentFn&& parent_of, unsigned threads = 1) {
  require(root < n, "tree root out of range");
  NavTree t;
  t.root = root;
  t.parent.assign(n, npos);
  t.parent[root] = root;
  parallel_for(n, threads, [&](std::size_t i) {
    if (i == root) return;
    std::size_t p = npos;
    try {
      p = parent_of(i);
    } catch (const InputError& e) {
      throw InputError("node " + std::to_string(i) + ": " + e.what());
    } catch (const RuntimeFailure& e) {
      throw RuntimeFailure("node " + std::to_string(i) + ": " + e.what());
    }
    t.parent[i] = p;
  });
  t.h.assign(n, npos);
  t.h[root] = 0;
  std::vector<std::size_t> chain;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t v = i;
    chain.clear();
    while (t.h[v] == npos) {
      chain.push_back(v);
      if (chain.size() > n) throw RuntimeFailure("navigation tree has a cycle through node " + std::to_string(i));
      const std::size_t p = t.parent[v];
      if (p >= n) throw RuntimeFailure("node " + std::to_string(v) + " has no parent");
      v = p;
    }
    std::size_t base = t.h[v];
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) t.h[*it] = ++base;
  }
  return t;
}

template <std::size_t D>
NavTree build_radial_tree(const PointSet<D>& ps, const SpatialIndex<D>& idx, unsigned threads = 1) {
  const std::size_t root = find_origin(ps.points);
  require(root != npos, "tree needs O in the point set");
  return build_tree(ps.size(), root, [&](std::size_t i) {
    const auto& X = ps[i];
    const std::size_t p = radial_step(idx, X, NavMode::toward_origin);
    if (!region_certified(ps.window, X, dist(X, ps[p]), NavMode::toward_origin))
      throw BoundaryExhaustion("search region leaves the window");
    return p;
  }, threads);
}

template <std::size_t D>
NavTree build_small_world_tree(const DenseSmallWorld<D>& sw, unsigned threads = 1) {
  return build_tree(sw.points().size(), sw.origin(), [&](std::size_t i) { return sw.next(i); }, threads);
}

inline NavTree build_compass_tree(const Triangulation& tri, unsigned threads = 1) {
  const std::size_t root = find_origin(tri.points);
  require(root != npos, "tree needs O in the point set");
  return build_tree(tri.size(), root, [&](std::size_t i) { return compass_step(tri, i, NavMode::toward_origin); },
                    threads);
}

inline std::vector<std::size_t> tree_path(const NavTree& t, std::size_t i) {
  require(i < t.size(), "node out of range");
  std::vector<std::size_t> p{i};
  while (p.back() != t.root) p.push_back(t.parent[p.back()]);
  return p;
}

struct PathMetrics {
  std::size_t H = 0;
  double Delta = 0.0;
  double G = 0.0;
  double euclid_len = 0.0;
};

// H, maximal deviation from the line OX, optional step functional g, length.
template <std::size_t D>
PathMetrics path_metrics(const std::vector<Vec<D>>& pts,
                         const std::function<double(const Vec<D>&, const Vec<D>&)>& g = {}) {
  PathMetrics m;
  if (pts.empty()) return m;
  m.H = pts.size() - 1;
  const Vec<D>& X = pts.front();
  const double x = norm(X);
  if (x == 0.0) return m;
  const Vec<D> u = (1.0 / x) * X;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Vec<D> bar = dot(pts[k], u) * u;
    m.Delta = std::max(m.Delta, norm(pts[k] - bar));
    if (k + 1 < pts.size()) {
      m.euclid_len += dist(pts[k], pts[k + 1]);
      if (g) m.G += g(pts[k], pts[k + 1]);
    }
  }
  return m;
}

template <std::size_t D>
PathMetrics path_metrics(const NavTree& t, const std::vector<Vec<D>>& pts, std::size_t i,
                         const std::function<double(const Vec<D>&, const Vec<D>&)>& g = {}) {
  std::vector<Vec<D>> chain;
  for (auto v : tree_path(t, i)) chain.push_back(pts[v]);
  return path_metrics<D>(chain, g);
}

// T_O(k): non-root nodes with H <= k, ascending.
inline std::vector<std::size_t> tree_ball(const NavTree& t, std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (i != t.root && t.h[i] <= k) out.push_back(i);
  return out;
}

// |T_O(k)| for k = 0..max H.
inline std::vector<std::size_t> tree_ball_profile(const NavTree& t) {
  std::vector<std::size_t> cnt(t.max_h() + 1, 0);
  for (std::size_t i = 0; i < t.size(); ++i)
    if (i != t.root) ++cnt[t.h[i]];
  for (std::size_t k = 1; k < cnt.size(); ++k) cnt[k] += cnt[k - 1];
  return cnt;
}

// Nodes X whose offspring (all descendants) include some Y at angle > |X|^(gamma-1) from X.
template <std::size_t D>
std::vector<std::size_t> offspring_cone_check(const NavTree& t, const std::vector<Vec<D>>& pts, double gamma) {
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0,1)");
  std::vector<double> max_angle(t.size(), 0.0);
  for (std::size_t y = 0; y < t.size(); ++y) {
    if (y == t.root) continue;
    for (std::size_t a = t.parent[y]; a != t.root; a = t.parent[a])
      max_angle[a] = std::max(max_angle[a], angle_between(pts[a], pts[y]));
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i == t.root) continue;
    if (max_angle[i] > std::pow(norm(pts[i]), gamma - 1.0)) out.push_back(i);
  }
  return out;
}

// Longitudinal / transverse bookkeeping of a planar path toward O.
struct TransverseTrace {
  std::vector<double> U, V, theta, p, q, Q, S, M;
  double max_residual = 0.0;  // recursion residual relative to |X|
  std::size_t lemma_violations = 0;
  double worst_lemma_gap = -std::numeric_limits<double>::infinity();  // max of V_k - S_k - M_k
};

inline TransverseTrace transverse_decomposition(const std::vector<Vec<2>>& path, const Vec<2>& e1, const Vec<2>& e2,
                                                double slack = 0.0) {
  TransverseTrace tr;
  const std::size_t n = path.size();
  if (n == 0) return tr;
  const double scale = std::max(1.0, norm(path.front()));
  for (std::size_t k = 0; k < n; ++k) {
    tr.U.push_back(dot(path[k], e1));
    tr.V.push_back(dot(path[k], e2));
    tr.theta.push_back(std::atan2(tr.V[k], tr.U[k]));
  }
  tr.S.assign(n, 0.0);
  tr.M.assign(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double c = std::cos(tr.theta[k]), s = std::sin(tr.theta[k]);
    const double xk = norm(path[k]);
    const Vec<2> xhat = xk > 0.0 ? (1.0 / xk) * path[k] : e1;
    // e2 carried along by the rotation taking e1 to the direction of X_k
    const Vec<2> e2k = {-s * e1[0] + c * e2[0], -s * e1[1] + c * e2[1]};
    const double pk = dot(path[k] - path[k + 1], xhat);
    const double qk = dot(path[k + 1] - path[k], e2k);
    tr.p.push_back(pk);
    tr.q.push_back(qk);
    tr.Q.push_back(qk * c);
    const double Vn = tr.V[k] + qk * c - pk * s;
    const double Un = tr.U[k] - pk * c - qk * s;
    tr.max_residual = std::max({tr.max_residual, std::fabs(Vn - tr.V[k + 1]) / scale,
                                std::fabs(Un - tr.U[k + 1]) / scale});
    tr.S[k + 1] = std::max(tr.S[k], dist(path[k + 1], path[k]));
    tr.M[k + 1] = std::max(0.0, tr.M[k] + tr.Q[k]);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double gap = tr.V[k] - tr.S[k] - tr.M[k];
    tr.worst_lemma_gap = std::max(tr.worst_lemma_gap, gap);
    if (gap > slack) ++tr.lemma_violations;
  }
  return tr;
}

inline void write_tree_csv(std::ostream& os, const NavTree& t) {
  CsvWriter w(os);
  w.field("child").field("parent").field("h");
  w.end_row();
  for (std::size_t i = 0; i < t.size(); ++i) {
    w.field(i).field(t.parent[i]).field(t.h[i]);
    w.end_row();
  }
}

}  // namespace ppnav
