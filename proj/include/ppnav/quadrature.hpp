#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"

namespace ppnav {

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  unsigned max_depth = 15;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  std::string scheme;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    error += o.error;
    converged = converged && o.converged;
    return *this;
  }
};

inline bool within_tol(double err, double value, const QuadratureSpec& q) {
  return err <= std::max(q.abs_tol, q.rel_tol * std::fabs(value));
}

// Adaptive Gauss-Kronrod (61 points); b may be +inf.
template <class F>
QuadResult integrate_gk(F&& f, double a, double b, const QuadratureSpec& q = {}) {
  QuadResult r;
  r.scheme = "gauss-kronrod-61";
  if (a == b) {
    r.converged = true;
    return r;
  }
  double err = 0.0;
  const double tol = std::max(q.rel_tol * 1e-2, std::numeric_limits<double>::epsilon() * 64);
  r.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, q.max_depth, tol, &err);
  r.error = err;
  r.converged = std::isfinite(r.value) && within_tol(r.error, r.value, q);
  return r;
}

namespace detail {

template <class F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol, int depth,
                   double& err, bool& ok) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double h = (b - a) / 12.0;
  const double left = h * (fa + 4.0 * flm + fm);
  const double right = h * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol || !(m > a && b > m)) {
    if (depth <= 0 && std::fabs(delta) > 15.0 * tol) ok = false;
    err += std::fabs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err, ok) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err, ok);
}

}  // namespace detail

// Adaptive Simpson with Richardson correction, finite interval, endpoints evaluated.
template <class F>
QuadResult integrate_simpson(F&& f, double a, double b, const QuadratureSpec& q = {}) {
  QuadResult r;
  r.scheme = "adaptive-simpson";
  require(std::isfinite(a) && std::isfinite(b), "simpson needs a finite interval");
  if (a == b) {
    r.converged = true;
    return r;
  }
  // seed the recursion on 8 panels so narrow features are not missed
  constexpr int panels = 8;
  bool ok = true;
  double err = 0.0, total = 0.0;
  const double tol = q.abs_tol / panels;
  const double w = (b - a) / panels;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * w, hi = i + 1 == panels ? b : a + (i + 1) * w;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += detail::simpson_rec(f, lo, hi, fa, fm, fb, whole, tol, int(q.max_depth), err, ok);
  }
  r.value = total;
  r.error = err;
  r.converged = ok && std::isfinite(total) && within_tol(err, total, q);
  return r;
}

}  // namespace ppnav
