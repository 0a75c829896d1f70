#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "quadrature.hpp"
#include "vec.hpp"

namespace ppnav {

// omega_k is the area of the unit sphere S^k; pi_d the volume of the unit ball.
struct GeometryConstants {
  double omega_dm2 = 0.0;
  double omega_dm1 = 0.0;
  double pi_d = 0.0;
};

inline GeometryConstants geometry_constants(int d) {
  require(d >= 2, "dimension must be at least 2");
  return {sphere_area(d - 1), sphere_area(d), unit_ball_volume(d)};
}

// int_0^{pi/2} sin^a(t) cos^b(t) dt = B((a+1)/2, (b+1)/2) / 2
inline double sin_cos_moment(double a, double b) {
  return 0.5 * std::exp(std::lgamma(0.5 * (a + 1)) + std::lgamma(0.5 * (b + 1)) - std::lgamma(0.5 * (a + b) + 1));
}

// G(rho) = int_rho^inf f(r) r^(d-1) dr, closed form (beta > d).
inline double radial_tail_moment(const ModelParams& p, double rho) {
  require(p.beta > p.d, "radial tail moment needs beta > d");
  const double rc = p.r_c(), k = p.beta - p.d;
  const double outer = p.c * std::pow(std::max(rho, rc), -k) / k;
  if (rho >= rc) return outer;
  return outer + (std::pow(rc, p.d) - std::pow(std::max(rho, 0.0), p.d)) / p.d;
}

// g(R) = int_0^R f(r) r^(d-1) dr
inline double radial_moment(const ModelParams& p, double R) {
  return RadialMass(p)(R) / sphere_area(p.d);
}

// Mass of the half-space {<y,e1> > t} under f(|y|).
inline QuadResult half_space_mass(const ModelParams& p, double t, const QuadratureSpec& q = {}) {
  require(p.beta > p.d, "half-space mass needs beta > d");
  require(t >= 0.0, "half-space offset must be nonnegative");
  const auto gc = geometry_constants(p.d);
  auto integrand = [&](double th) {
    const double c = std::cos(th);
    if (!(c > 0.0)) return 0.0;
    return std::pow(std::sin(th), p.d - 2) * radial_tail_moment(p, t / c);
  };
  QuadResult r = integrate_gk(integrand, 0.0, std::numbers::pi / 2, q);
  r.value *= gc.omega_dm2;
  r.error *= gc.omega_dm2;
  return r;
}

struct ProgressTailConstant {
  double K = 0.0;            // printed form with the factor 2
  double K_corrected = 0.0;  // asymptotic level of the exact tail
  double Lambda0 = 0.0;
  double radial_integral = 0.0;   // int_0^inf f(r) r^(d-1) dr
  double angular_integral = 0.0;  // int_0^{pi/2} cos^(beta-d)
  double error = 0.0;
  bool converged = false;
};

inline ProgressTailConstant progress_tail_constant(const ModelParams& p, const QuadratureSpec& q = {}) {
  p.validate();
  if (!(p.beta > p.d)) throw InputError("progress tail constant needs beta > d");
  const auto gc = geometry_constants(p.d);
  const double rc = p.r_c(), k = p.beta - p.d;
  auto fr = [&](double r) { return p.f(r) * std::pow(r, p.d - 1); };
  QuadResult rad = integrate_gk(fr, 0.0, rc, q);
  rad += integrate_gk(fr, rc, std::numeric_limits<double>::infinity(), q);
  QuadResult ang = integrate_gk([&](double th) { return std::pow(std::cos(th), k); }, 0.0, std::numbers::pi / 2, q);
  ProgressTailConstant out;
  out.radial_integral = rad.value;
  out.angular_integral = ang.value;
  out.Lambda0 = 0.5 * gc.omega_dm1 * rad.value;
  const double norm = 1.0 - std::exp(-out.Lambda0);
  out.K = 2.0 * p.c * gc.omega_dm2 / k / norm * ang.value;
  out.K_corrected = p.c * gc.omega_dm2 / k * sin_cos_moment(p.d - 2, k) / norm;
  out.error = rad.error + ang.error;
  out.converged = rad.converged && ang.converged;
  return out;
}

// P(P > t) for the first directed step: (1 - e^-Lambda_t) / (1 - e^-Lambda_0).
inline double progress_tail_exact(double t, const ModelParams& p, const QuadratureSpec& q = {}) {
  if (t <= 0.0) return 1.0;
  const double l0 = half_space_mass(p, 0.0, q).value;
  const double lt = half_space_mass(p, t, q).value;
  return -std::expm1(-lt) / -std::expm1(-l0);
}

inline void require_subcritical(const ModelParams& p) {
  if (!(p.beta > p.d - 2 && p.beta < p.d)) throw InputError("regime needs d-2 < beta < d");
}

// Printed limit law of |A(X)|/|X|^alpha.
inline double q_limit_tail(double s, const ModelParams& p) {
  require_subcritical(p);
  if (!(s >= 0.0)) throw InputError("s must be nonnegative");
  return std::exp(-4.0 * p.c * sphere_area(p.d - 1) * s * s);
}

// Limit obtained from the neighbor mass of B(O, s|X|^alpha); |X|-free in d = 2.
inline double q_limit_tail_corrected(double s, const ModelParams& p) {
  require_subcritical(p);
  if (p.d != 2) throw InputError("corrected q-limit law is derived for d = 2 only");
  if (!(s >= 0.0)) throw InputError("s must be nonnegative");
  return std::exp(-p.c * std::numbers::pi * s * s);
}

inline double contraction_exponent(const ModelParams& p) { return 1.0 - (p.d - p.beta) / 2.0; }

// Mass int_{B(O,rho)} f(|X - y|) dy seen from |X| = x, rho <= x. Polar
// coordinates around X with sin(theta) = (rho/x) sin(phi).
inline QuadResult offset_ball_mass(const ModelParams& p, double rho, double x, const QuadratureSpec& q = {}) {
  require(x > 0.0 && rho >= 0.0 && rho <= x, "offset ball mass needs 0 <= rho <= |X|");
  QuadResult r;
  if (rho == 0.0) {
    r.converged = true;
    return r;
  }
  const auto gc = geometry_constants(p.d);
  const double e = rho / x;
  auto integrand = [&](double phi) {
    const double s = e * std::sin(phi);
    const double c = std::sqrt(std::max(0.0, 1.0 - s * s));
    const double w = e * std::cos(phi);
    if (!(c > 0.0)) return 0.0;
    // c - w = (1 - e^2)/(c + w), exact zero at e = 1
    const double lo = x * (1.0 - e) * (1.0 + e) / (c + w), hi = x * (c + w);
    const double jac = w / c;
    return std::pow(s, p.d - 2) * (radial_moment(p, hi) - radial_moment(p, lo)) * jac;
  };
  r = integrate_gk(integrand, 0.0, std::numbers::pi / 2, q);
  r.value *= gc.omega_dm2;
  r.error *= gc.omega_dm2;
  return r;
}

// Expected number of fresh neighbors of X_0 in B(O,|X_0|).
inline QuadResult ball_neighbor_mass(const ModelParams& p, double x, const QuadratureSpec& q = {}) {
  return offset_ball_mass(p, x, x, q);
}

// Finite-|X| law of |A(X)|/|X|^alpha for a first step.
inline double q_tail_exact(double s, const ModelParams& p, double x, const QuadratureSpec& q = {}) {
  require_subcritical(p);
  const double rho = s * std::pow(x, contraction_exponent(p));
  if (rho >= x) return 0.0;
  const double all = offset_ball_mass(p, x, x, q).value;
  const double inner = offset_ball_mass(p, rho, x, q).value;
  // conditioned on at least one neighbor in B(O,|X|)
  return (std::exp(-inner) - std::exp(-all)) / -std::expm1(-all);
}

// int_{B(O,eps)} |e1 - y|^-d dy, eps < 1.
inline QuadResult log_ball_integral(int d, double eps, const QuadratureSpec& q = {}) {
  require(eps >= 0.0 && eps < 1.0, "ball radius must lie in [0,1)");
  QuadResult r;
  if (eps == 0.0) {
    r.converged = true;
    return r;
  }
  const double omega = sphere_area(d - 1);
  auto integrand = [&](double phi) {
    const double s = eps * std::sin(phi);
    const double c = std::sqrt(1.0 - s * s);
    const double w = eps * std::cos(phi);
    return std::pow(s, d - 2) * 2.0 * std::atanh(w / c) * w / c;
  };
  r = integrate_gk(integrand, 0.0, std::numbers::pi / 2, q);
  r.value *= omega;
  r.error *= omega;
  return r;
}

inline void require_critical(const ModelParams& p) {
  if (p.beta != p.d) throw InputError("regime needs beta = d");
}

// 1 - exp(-c int_{B(O,e^-s)} |e1 - y|^-d dy)
inline double f_tilde_tail(double s, const ModelParams& p, const QuadratureSpec& q = {}) {
  require_critical(p);
  if (!(s > 0.0)) throw InputError("f_tilde_tail needs s > 0");
  const double I = log_ball_integral(p.d, std::exp(-s), q).value;
  return -std::expm1(-p.c * I);
}

inline double f_tilde_asymptote_printed(double s, const ModelParams& p) {
  return 4.0 * p.c * sphere_area(p.d - 1) * std::exp(-2.0 * s);
}

inline double f_tilde_asymptote(double s, const ModelParams& p) {
  return p.c * unit_ball_volume(p.d) * std::exp(-p.d * s);
}

struct MuTilde {
  double value = 0.0;  // Gauss-Kronrod scheme
  double error = 0.0;
  double simpson = 0.0;  // independent scheme
  double simpson_error = 0.0;
  double cutoff = 0.0;        // upper limit S
  double tail_bound = 0.0;    // bound on the discarded integral beyond S
  bool converged = false;
  bool schemes_agree = false;
};

// Bound on int_S^inf F~(s) ds via |e1 - y| >= 1 - e^-s.
inline double mu_tilde_tail_bound(double S, const ModelParams& p) {
  const double e = std::exp(-S);
  return p.c * unit_ball_volume(p.d) * std::pow(e, p.d) / (p.d * std::pow(1.0 - e, p.d));
}

inline MuTilde mu_tilde(const ModelParams& p, const QuadratureSpec& q = {}, double tail_eps = 1e-10) {
  p.validate();
  require_critical(p);
  MuTilde m;
  double S = 1.0;
  while (mu_tilde_tail_bound(S, p) >= tail_eps) S += 0.25;
  m.cutoff = S;
  m.tail_bound = mu_tilde_tail_bound(S, p);
  QuadratureSpec inner = q;
  inner.abs_tol = q.abs_tol * 1e-2;
  inner.rel_tol = q.rel_tol * 1e-2;
  auto ft = [&](double s) { return s > 0.0 ? f_tilde_tail(s, p, inner) : 1.0; };
  // split near the origin where the integrand has a logarithmic corner
  QuadResult gk = integrate_gk(ft, 0.0, 1.0, q);
  gk += integrate_gk(ft, 1.0, S, q);
  m.value = gk.value;
  m.error = gk.error;

  auto ft_simpson = [&](double s) {
    if (!(s > 0.0)) return 1.0;
    const double eps = std::exp(-s);
    const double omega = sphere_area(p.d - 1);
    auto g = [&](double phi) {
      const double u = eps * std::sin(phi);
      const double c = std::sqrt(1.0 - u * u);
      const double w = eps * std::cos(phi);
      return std::pow(u, p.d - 2) * 2.0 * std::atanh(w / c) * w / c;
    };
    const QuadResult I = integrate_simpson(g, 0.0, std::numbers::pi / 2, inner);
    return -std::expm1(-p.c * omega * I.value);
  };
  QuadResult sp = integrate_simpson(ft_simpson, 0.0, 1.0, q);
  sp += integrate_simpson(ft_simpson, 1.0, S, q);
  m.simpson = sp.value;
  m.simpson_error = sp.error;
  m.converged = gk.converged && sp.converged;
  m.schemes_agree = std::fabs(m.value - m.simpson) <= 10.0 * (m.error + m.simpson_error) + 1e-12;
  return m;
}

// Roots A <= B in r of r^2 - 2 r cos(theta) + u(2-u) = 0.
inline std::pair<double, double> chord_points(double theta, double u) {
  if (!(u > 0.0 && u < 1.0)) throw InputError("chord_points needs u in (0,1)");
  if (!(theta >= 0.0 && theta < std::asin(1.0 - u))) throw InputError("chord_points: no intersection at this angle");
  const double c = std::cos(theta);
  const double prod = u * (2.0 - u);
  const double B = c * (1.0 + std::sqrt(1.0 - prod / (c * c)));
  return {prod / B, B};
}

inline double loglog_limit(int d, double beta) {
  if (!(beta > d - 2 && beta < d)) throw InputError("loglog limit needs d-2 < beta < d");
  return -1.0 / std::log(1.0 - (d - beta) / 2.0);
}

// Radius exp(alpha^{-k}) of the k-hop ball in the loglog regime, with
// alpha^{-k} read as growing in k.
inline double loglog_ball_radius(double k, const ModelParams& p) {
  require_subcritical(p);
  return std::exp(std::pow(contraction_exponent(p), -k));
}

struct TailCurve {
  std::string regime;  // progress-tail, q-limit, f-tilde
  std::vector<std::pair<double, double>> points;

  // Values in [0,1] and nonincreasing (up to slack).
  bool valid(double slack = 1e-12) const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double v = points[i].second;
      if (!(v >= -slack && v <= 1.0 + slack)) return false;
      if (i > 0 && v > points[i - 1].second + slack) return false;
    }
    return true;
  }
};

template <class F>
TailCurve tabulate(std::string regime, const std::vector<double>& grid, F&& fn) {
  TailCurve t;
  t.regime = std::move(regime);
  for (double x : grid) t.points.emplace_back(x, fn(x));
  return t;
}

inline std::vector<double> linear_grid(double a, double b, std::size_t n) {
  require(n >= 2 && b > a, "grid needs n >= 2 and b > a");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * double(i) / double(n - 1);
  return g;
}

inline std::vector<double> log_grid(double a, double b, std::size_t n) {
  require(n >= 2 && b > a && a > 0.0, "log grid needs n >= 2 and 0 < a < b");
  std::vector<double> g(n);
  const double la = std::log(a), lb = std::log(b);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(la + (lb - la) * double(i) / double(n - 1));
  return g;
}

}  // namespace ppnav
