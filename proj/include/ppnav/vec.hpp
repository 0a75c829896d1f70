#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

#include "errors.hpp"

namespace ppnav {

template <std::size_t D>
using Vec = std::array<double, D>;

template <std::size_t D>
constexpr Vec<D> operator+(const Vec<D>& a, const Vec<D>& b) {
  Vec<D> r{};
  for (std::size_t i = 0; i < D; ++i) r[i] = a[i] + b[i];
  return r;
}

template <std::size_t D>
constexpr Vec<D> operator-(const Vec<D>& a, const Vec<D>& b) {
  Vec<D> r{};
  for (std::size_t i = 0; i < D; ++i) r[i] = a[i] - b[i];
  return r;
}

template <std::size_t D>
constexpr Vec<D> operator*(double s, const Vec<D>& a) {
  Vec<D> r{};
  for (std::size_t i = 0; i < D; ++i) r[i] = s * a[i];
  return r;
}

template <std::size_t D>
constexpr double dot(const Vec<D>& a, const Vec<D>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < D; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t D>
constexpr double norm2(const Vec<D>& a) {
  return dot(a, a);
}

template <std::size_t D>
double norm(const Vec<D>& a) {
  if constexpr (D == 2) return std::hypot(a[0], a[1]);
  else return std::sqrt(norm2(a));
}

template <std::size_t D>
double dist(const Vec<D>& a, const Vec<D>& b) {
  return norm(a - b);
}

template <std::size_t D>
constexpr double dist2(const Vec<D>& a, const Vec<D>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < D; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

template <std::size_t D>
constexpr Vec<D> unit_axis(std::size_t i = 0) {
  Vec<D> e{};
  e[i] = 1.0;
  return e;
}

template <std::size_t D>
bool all_finite(const Vec<D>& a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

// Volume of the unit ball of R^d.
inline double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

// Surface area of the unit sphere of R^d; d = 1 gives 2.
inline double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
}

// Angle between two nonzero vectors, in [0, pi].
template <std::size_t D>
double angle_between(const Vec<D>& a, const Vec<D>& b) {
  if constexpr (D == 2) {
    const double cr = a[0] * b[1] - a[1] * b[0];
    return std::fabs(std::atan2(cr, dot(a, b)));
  } else {
    const double c = dot(a, b) / (norm(a) * norm(b));
    return std::acos(std::fmax(-1.0, std::fmin(1.0, c)));
  }
}

inline Vec<2> rotate2(const Vec<2>& v, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return {c * v[0] - s * v[1], s * v[0] + c * v[1]};
}

}  // namespace ppnav
