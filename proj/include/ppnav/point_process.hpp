#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "vec.hpp"

namespace ppnav {

enum class WindowKind { ball, annulus };

template <std::size_t D>
struct Window {
  WindowKind kind = WindowKind::ball;
  Vec<D> center{};
  double inner = 0.0;
  double outer = 0.0;

  static Window ball(double radius, Vec<D> c = {}) {
    Window w{WindowKind::ball, c, 0.0, radius};
    w.validate();
    return w;
  }

  static Window annulus(double r_in, double r_out, Vec<D> c = {}) {
    Window w{WindowKind::annulus, c, r_in, r_out};
    w.validate();
    return w;
  }

  void validate() const {
    require(all_finite(center), "window center must be finite");
    require(std::isfinite(inner) && std::isfinite(outer), "window radii must be finite");
    require(inner >= 0.0 && outer >= 0.0, "window radii must be nonnegative");
    require(inner <= outer, "annulus inner radius exceeds outer radius");
    require(kind == WindowKind::annulus || inner == 0.0, "ball window has no inner radius");
  }

  double volume() const {
    const double v = unit_ball_volume(int(D));
    return v * (std::pow(outer, double(D)) - std::pow(inner, double(D)));
  }

  bool contains(const Vec<D>& p) const {
    const double r2 = dist2(p, center);
    return r2 < outer * outer && r2 >= inner * inner;
  }
};

template <std::size_t D>
struct PointSet {
  Window<D> window{};
  std::vector<Vec<D>> points;
  std::uint64_t seed = 0;
  // Leading atoms added by palm_add (O first when present).
  std::size_t palm_count = 0;

  std::size_t size() const { return points.size(); }
  const Vec<D>& operator[](std::size_t i) const { return points[i]; }
};

// Uniform point in the window; cube rejection for balls in d <= 4, polar otherwise.
template <std::size_t D>
Vec<D> uniform_in_window(const Window<D>& w, Rng& rng) {
  if (w.kind == WindowKind::ball && D <= 4) {
    const double R = w.outer;
    for (;;) {
      Vec<D> u{};
      double n2 = 0.0;
      for (auto& x : u) {
        x = 2.0 * uniform01(rng) - 1.0;
        n2 += x * x;
      }
      if (n2 < 1.0) return w.center + R * u;
    }
  }
  const double a = std::pow(w.inner, double(D)), b = std::pow(w.outer, double(D));
  double r = std::pow(a + uniform01(rng) * (b - a), 1.0 / double(D));
  if (r < w.inner) r = w.inner;
  const auto dir = unit_direction<D>(rng);
  Vec<D> p = w.center + r * dir;
  // Guard the half-open boundary against rounding up to the outer radius.
  while (!w.contains(p)) {
    r = std::pow(a + uniform01(rng) * (b - a), 1.0 / double(D));
    p = w.center + r * unit_direction<D>(rng);
  }
  return p;
}

// Intensity-1 Poisson process in the window, fully determined by the seed.
template <std::size_t D>
PointSet<D> sample_ppp(const Window<D>& w, std::uint64_t seed) {
  static_assert(D >= 2, "dimension must be at least 2");
  w.validate();
  PointSet<D> ps;
  ps.window = w;
  ps.seed = seed;
  Rng rng = Rng::stream(seed, "ppp");
  const double vol = w.volume();
  if (!(vol > 0.0)) return ps;
  const std::uint64_t n = poisson(rng, vol);
  ps.points.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) ps.points.push_back(uniform_in_window(w, rng));
  return ps;
}

// Adds Palm atoms after any existing ones; O passed first gets index 0.
template <std::size_t D>
PointSet<D> palm_add(const PointSet<D>& ps, const std::vector<Vec<D>>& extra) {
  for (const auto& p : extra) {
    require(all_finite(p), "palm atom must be finite");
    require(p == Vec<D>{} || ps.window.contains(p), "palm atom outside the window");
  }
  PointSet<D> out;
  out.window = ps.window;
  out.seed = ps.seed;
  out.points.reserve(ps.size() + extra.size());
  out.points.insert(out.points.end(), ps.points.begin(), ps.points.begin() + ps.palm_count);
  out.points.insert(out.points.end(), extra.begin(), extra.end());
  out.points.insert(out.points.end(), ps.points.begin() + ps.palm_count, ps.points.end());
  out.palm_count = ps.palm_count + extra.size();
  return out;
}

template <std::size_t D>
void write_points_csv(std::ostream& os, const PointSet<D>& ps) {
  CsvWriter w(os);
  for (std::size_t i = 0; i < D; ++i) w.field("x" + std::to_string(i));
  w.end_row();
  for (const auto& p : ps.points) {
    for (double x : p) w.field(x);
    w.end_row();
  }
}

}  // namespace ppnav
