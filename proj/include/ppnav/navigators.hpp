#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "delaunay.hpp"
#include "errors.hpp"
#include "small_world.hpp"
#include "spatial_index.hpp"

namespace ppnav {

enum class Termination { absorbed, direction_escape, step_limit };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::absorbed: return "absorbed-at-O";
    case Termination::direction_escape: return "direction-escape";
    case Termination::step_limit: return "step-limit";
  }
  return "?";
}

inline std::string to_string(NavMode m) { return m == NavMode::toward_origin ? "toward-origin" : "directed"; }

// Sign convention for directed compass routing: the literal reading maximizes
// <e1, (X - Y)/|X - Y|>, the aligned one <e1, (Y - X)/|Y - X|>.
enum class DirectedSign { literal, aligned };

struct NavLimits {
  std::size_t max_steps = 10'000'000;
  std::size_t max_points = 50'000'000;
};

template <std::size_t D>
struct Path {
  std::vector<Vec<D>> points;        // X_0 .. X_H
  std::vector<std::size_t> indices;  // point indices when navigating a fixed set
  std::vector<double> progress;      // per step, size H
  std::vector<double> scaled;        // per step, size H
  Termination termination = Termination::step_limit;
  NavMode mode = NavMode::toward_origin;

  std::size_t H() const { return points.empty() ? 0 : points.size() - 1; }
};

// -ln(|next|/|X|); +inf when next = O.
template <std::size_t D>
double scaled_progress(const Vec<D>& X, const Vec<D>& next) {
  const double x = norm(X);
  require(x > 0.0, "scaled progress needs |X| > 0");
  const double y = norm(next);
  if (y == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(y / x);
}

template <std::size_t D>
double step_progress(const Vec<D>& X, const Vec<D>& next, NavMode mode, const Vec<D>& e1) {
  if (mode == NavMode::toward_origin) return norm(X) - norm(next);
  return dot(next - X, e1);
}

template <std::size_t D>
void finish_path(Path<D>& p, const Vec<D>& e1 = unit_axis<D>(0)) {
  p.progress.clear();
  p.scaled.clear();
  for (std::size_t k = 0; k + 1 < p.points.size(); ++k) {
    p.progress.push_back(step_progress(p.points[k], p.points[k + 1], p.mode, e1));
    const double x = norm(p.points[k]);
    p.scaled.push_back(x > 0.0 ? scaled_progress(p.points[k], p.points[k + 1])
                               : std::numeric_limits<double>::quiet_NaN());
  }
}

template <std::size_t D>
Path<D> path_from_indices(const std::vector<Vec<D>>& pts, const std::vector<std::size_t>& idx, NavMode mode,
                          Termination t, const Vec<D>& e1 = unit_axis<D>(0)) {
  Path<D> p;
  p.mode = mode;
  p.termination = t;
  p.indices = idx;
  for (auto i : idx) p.points.push_back(pts[i]);
  finish_path(p, e1);
  return p;
}

// Nearest point of the region to X: B(O,|X|) toward the origin, the open
// half-space beyond <X,e1> when directed. Ties go to the lowest index.
template <std::size_t D>
std::size_t radial_step(const SpatialIndex<D>& idx, const Vec<D>& X, NavMode mode,
                        const Vec<D>& e1 = unit_axis<D>(0)) {
  std::optional<std::size_t> r;
  if (mode == NavMode::toward_origin) {
    require(norm2(X) > 0.0, "radial step from O (navigation already absorbed)");
    const double x2 = norm2(X);
    r = idx.nearest_in_region(X, [&](std::size_t, const Vec<D>& y) { return norm2(y) < x2; });
  } else {
    const double u = dot(X, e1);
    r = idx.nearest_in_region(X, [&](std::size_t, const Vec<D>& y) { return dot(y, e1) > u; });
  }
  if (!r) throw BoundaryExhaustion("boundary exhaustion: empty search region");
  return *r;
}

// Delaunay neighbor maximizing the compass inner product; ties by index.
inline std::size_t compass_step(const Triangulation& tri, std::size_t i, NavMode mode,
                                DirectedSign sign = DirectedSign::aligned, const Vec<2>& e1 = {1.0, 0.0}) {
  const Vec<2>& X = tri.points.at(i);
  Vec<2> dir{};
  double flip = 1.0;
  if (mode == NavMode::toward_origin) {
    const double x = norm(X);
    require(x > 0.0, "compass step from O");
    dir = (1.0 / x) * X;
  } else {
    dir = e1;
    if (sign == DirectedSign::aligned) flip = -1.0;
  }
  std::size_t best = npos;
  double best_v = -std::numeric_limits<double>::infinity();
  for (auto j : tri.adjacency.at(i)) {
    const Vec<2> w = X - tri.points[j];
    const double v = flip * dot(dir, w) / norm(w);
    if (v > best_v) {
      best_v = v;
      best = j;
    }
  }
  return best;
}

// Lazy small-world navigation (exact conditional construction).
template <std::size_t D>
Path<D> navigate_small_world(const ModelParams& params, const Vec<D>& start, NavMode mode, const NavLimits& lim,
                             std::uint64_t seed, typename NavState<D>::Options opt = {},
                             NavDiagnostics* diag = nullptr) {
  NavState<D> st(params, mode, start, seed, opt);
  Termination t = Termination::step_limit;
  if (st.absorbed()) {
    t = Termination::absorbed;
  } else {
    for (std::size_t k = 0; k < lim.max_steps; ++k) {
      st.advance();
      if (st.absorbed()) {
        t = Termination::absorbed;
        break;
      }
      if (st.realized().size() > lim.max_points) break;
    }
  }
  if (diag) *diag = st.diagnostics();
  return path_from_indices(st.realized(), st.path(), mode, t);
}

template <std::size_t D>
std::size_t find_origin(const std::vector<Vec<D>>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i] == Vec<D>{}) return i;
  return npos;
}

// True when every point of the search region within distance r of X is
// guaranteed to lie inside the sampled window.
template <std::size_t D>
bool region_certified(const Window<D>& w, const Vec<D>& X, double r, NavMode mode) {
  if (w.kind != WindowKind::ball) return false;
  if (mode == NavMode::toward_origin && norm(w.center) + norm(X) <= w.outer) return true;
  return dist(X, w.center) + r <= w.outer;
}

// Radial navigation on a realized point set; start is a point index.
template <std::size_t D>
Path<D> navigate_radial(const PointSet<D>& ps, const SpatialIndex<D>& idx, std::size_t start, NavMode mode,
                        const NavLimits& lim, const Vec<D>& e1 = unit_axis<D>(0)) {
  require(start < ps.size(), "start index out of range");
  std::vector<std::size_t> path{start};
  Termination t = Termination::step_limit;
  for (std::size_t k = 0; k < lim.max_steps; ++k) {
    const Vec<D>& X = ps[path.back()];
    if (mode == NavMode::toward_origin && norm2(X) == 0.0) {
      t = Termination::absorbed;
      break;
    }
    std::size_t nxt = npos;
    try {
      nxt = radial_step(idx, X, mode, e1);
    } catch (const BoundaryExhaustion&) {
      if (mode == NavMode::directed) {
        t = Termination::direction_escape;
        break;
      }
      throw;
    }
    if (!region_certified(ps.window, X, dist(X, ps[nxt]), mode)) {
      if (mode == NavMode::directed) {
        t = Termination::direction_escape;
        break;
      }
      throw BoundaryExhaustion("boundary exhaustion: search region leaves the window at point " +
                               std::to_string(path.back()));
    }
    path.push_back(nxt);
  }
  if (mode == NavMode::toward_origin && t == Termination::step_limit && norm2(ps[path.back()]) == 0.0)
    t = Termination::absorbed;
  return path_from_indices(ps.points, path, mode, t, e1);
}

// Compass routing on a Delaunay triangulation; start is a point index.
inline Path<2> navigate_compass(const Triangulation& tri, std::size_t start, NavMode mode, const NavLimits& lim,
                                DirectedSign sign = DirectedSign::aligned, const Vec<2>& e1 = {1.0, 0.0}) {
  require(start < tri.size(), "start index out of range");
  std::vector<std::size_t> path{start};
  std::unordered_set<std::size_t> seen{start};
  Termination t = Termination::step_limit;
  for (std::size_t k = 0; k < lim.max_steps; ++k) {
    const std::size_t cur = path.back();
    if (mode == NavMode::toward_origin && norm2(tri.points[cur]) == 0.0) {
      t = Termination::absorbed;
      break;
    }
    if (mode == NavMode::directed && k > 0 && tri.on_hull(cur)) {
      t = Termination::direction_escape;
      break;
    }
    const std::size_t nxt = compass_step(tri, cur, mode, sign, e1);
    if (!seen.insert(nxt).second)
      throw RuntimeFailure("compass navigation revisited vertex " + std::to_string(nxt));
    path.push_back(nxt);
  }
  if (mode == NavMode::toward_origin && t == Termination::step_limit && norm2(tri.points[path.back()]) == 0.0)
    t = Termination::absorbed;
  return path_from_indices(tri.points, path, mode, t, e1);
}

// Small-world navigation on a fully realized set (dense oracle).
template <std::size_t D>
Path<D> navigate_dense(const DenseSmallWorld<D>& sw, std::size_t start, const NavLimits& lim) {
  std::vector<std::size_t> path{start};
  Termination t = Termination::step_limit;
  for (std::size_t k = 0; k < lim.max_steps; ++k) {
    if (path.back() == sw.origin()) {
      t = Termination::absorbed;
      break;
    }
    path.push_back(sw.next(path.back()));
  }
  if (path.back() == sw.origin()) t = Termination::absorbed;
  return path_from_indices(sw.points(), path, NavMode::toward_origin, t);
}

template <std::size_t D>
void write_path_csv(std::ostream& os, const Path<D>& p) {
  CsvWriter w(os);
  w.field("step");
  for (std::size_t i = 0; i < D; ++i) w.field("x" + std::to_string(i));
  w.field("progress").field("scaled_progress");
  w.end_row();
  for (std::size_t k = 0; k < p.points.size(); ++k) {
    w.field(k);
    for (double x : p.points[k]) w.field(x);
    if (k < p.progress.size()) w.field(p.progress[k]).field(p.scaled[k]);
    else w.field(std::string()).field(std::string());
    w.end_row();
  }
}

template <std::size_t D>
nlohmann::ordered_json path_sidecar(const Path<D>& p) {
  nlohmann::ordered_json j;
  j["termination"] = to_string(p.termination);
  j["mode"] = to_string(p.mode);
  j["H"] = p.H();
  return j;
}

}  // namespace ppnav
