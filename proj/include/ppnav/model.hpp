#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"
#include "vec.hpp"

namespace ppnav {

// Small-world edge law f(t) = min(1, c t^-beta).
struct ModelParams {
  int d = 2;
  double beta = 3.0;
  double c = 1.0;

  void validate() const {
    require(d >= 2, "dimension must be at least 2");
    require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
    require(std::isfinite(c) && c > 0.0, "c must be positive");
  }

  // Radius below which f = 1.
  double r_c() const { return std::pow(c, 1.0 / beta); }

  double f(double t) const {
    if (!(t > 0.0)) return 1.0;
    const double v = c * std::pow(t, -beta);
    return v < 1.0 ? v : 1.0;
  }
};

// Closed-form mass m(R) = integral of f(|x|) over B(O,R) and its inverse.
class RadialMass {
 public:
  RadialMass() = default;
  explicit RadialMass(const ModelParams& p)
      : p_(p), rc_(p.r_c()), vol_(unit_ball_volume(p.d)), area_(sphere_area(p.d)) {
    core_ = vol_ * std::pow(rc_, double(p.d));
  }

  const ModelParams& params() const { return p_; }

  double operator()(double R) const {
    const double d = p_.d;
    if (!(R > 0.0)) return 0.0;
    if (R <= rc_) return vol_ * std::pow(R, d);
    if (std::isinf(R)) return total();
    return core_ + area_ * tail_integral(rc_, R);
  }

  // Mass of the whole space; infinite unless beta > d.
  double total() const {
    if (p_.beta <= p_.d) return std::numeric_limits<double>::infinity();
    return core_ + area_ * p_.c * std::pow(rc_, p_.d - p_.beta) / (p_.beta - p_.d);
  }

  // Smallest R with m(R) = m.
  double inverse(double m) const {
    const double d = p_.d;
    if (!(m > 0.0)) return 0.0;
    if (m <= core_) return std::pow(m / vol_, 1.0 / d);
    const double rest = (m - core_) / (area_ * p_.c);
    if (p_.beta == d) return rc_ * std::exp(rest);
    const double a = d - p_.beta;
    // rest = (R^a - rc^a) / a
    const double base = std::pow(rc_, a) + a * rest;
    if (!(base > 0.0)) return std::numeric_limits<double>::infinity();
    return std::pow(base, 1.0 / a);
  }

  // Radius beyond which the remaining mass is below eps (beta > d).
  double tail_radius(double eps) const {
    if (p_.beta <= p_.d) return std::numeric_limits<double>::infinity();
    const double k = p_.beta - p_.d;
    // area c R^-k / k = eps
    const double R = std::pow(area_ * p_.c / (k * eps), 1.0 / k);
    return std::max(R, rc_);
  }

 private:
  // c * integral_a^b r^(d-1-beta) dr
  double tail_integral(double a, double b) const {
    const double e = p_.d - p_.beta;
    if (e == 0.0) return p_.c * std::log(b / a);
    return p_.c * (std::pow(b, e) - std::pow(a, e)) / e;
  }

  ModelParams p_{};
  double rc_ = 1.0, vol_ = 0.0, area_ = 0.0, core_ = 0.0;
};

}  // namespace ppnav
