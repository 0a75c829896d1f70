#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "vec.hpp"

namespace ppnav::geom {

// Exact floating-point expansion arithmetic (Shewchuk, "Adaptive precision
// floating-point arithmetic and fast robust geometric predicates").
namespace detail {

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  const double av = x - bv;
  y = (a - av) + (b - bv);
}

inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

// e + b, zero components dropped.
inline std::vector<double> grow(const std::vector<double>& e, double b) {
  std::vector<double> h;
  h.reserve(e.size() + 1);
  double q = b;
  for (double ei : e) {
    double s, t;
    two_sum(q, ei, s, t);
    q = s;
    if (t != 0.0) h.push_back(t);
  }
  if (q != 0.0 || h.empty()) h.push_back(q);
  return h;
}

inline std::vector<double> scale(const std::vector<double>& e, double b) {
  std::vector<double> h;
  if (e.empty()) return h;
  h.reserve(2 * e.size());
  double q, hh;
  two_product(e[0], b, q, hh);
  if (hh != 0.0) h.push_back(hh);
  for (std::size_t i = 1; i < e.size(); ++i) {
    double p1, p0, sum;
    two_product(e[i], b, p1, p0);
    two_sum(q, p0, sum, hh);
    if (hh != 0.0) h.push_back(hh);
    two_sum(p1, sum, q, hh);
    if (hh != 0.0) h.push_back(hh);
  }
  if (q != 0.0 || h.empty()) h.push_back(q);
  return h;
}

inline int sign_of(const std::vector<double>& e) {
  for (auto it = e.rbegin(); it != e.rend(); ++it)
    if (*it != 0.0) return *it > 0.0 ? 1 : -1;
  return 0;
}

// Exact sign of a sum of signed monomials of doubles.
class ExactSum {
 public:
  void add_monomial(int sgn, std::initializer_list<double> factors) {
    std::vector<double> m{double(sgn)};
    for (double f : factors) m = scale(m, f);
    for (double c : m) acc_ = grow(acc_, c);
  }
  int sign() const { return sign_of(acc_); }

 private:
  std::vector<double> acc_;
};

inline constexpr double eps = std::numeric_limits<double>::epsilon() / 2.0;
inline constexpr double ccwerrboundA = (3.0 + 16.0 * eps) * eps;
inline constexpr double iccerrboundA = (10.0 + 96.0 * eps) * eps;

inline int orient_exact(const Vec<2>& a, const Vec<2>& b, const Vec<2>& c) {
  // det [[ax ay 1] [bx by 1] [cx cy 1]] expanded into monomials
  ExactSum s;
  s.add_monomial(+1, {a[0], b[1]});
  s.add_monomial(-1, {a[0], c[1]});
  s.add_monomial(-1, {a[1], b[0]});
  s.add_monomial(+1, {a[1], c[0]});
  s.add_monomial(+1, {b[0], c[1]});
  s.add_monomial(-1, {b[1], c[0]});
  return s.sign();
}

inline int incircle_exact(const Vec<2>& a, const Vec<2>& b, const Vec<2>& c, const Vec<2>& d) {
  // Leibniz expansion of det rows (x, y, x^2 + y^2, 1).
  const std::array<const Vec<2>*, 4> P{&a, &b, &c, &d};
  std::array<int, 4> perm{0, 1, 2, 3};
  ExactSum s;
  auto parity = [](const std::array<int, 4>& p) {
    int inv = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (p[i] > p[j]) ++inv;
    return inv % 2 == 0 ? 1 : -1;
  };
  do {
    // perm[col] = row used for that column
    const Vec<2>& rx = *P[perm[0]];
    const Vec<2>& ry = *P[perm[1]];
    const Vec<2>& rl = *P[perm[2]];
    const int sg = parity(perm);
    s.add_monomial(sg, {rx[0], ry[1], rl[0], rl[0]});
    s.add_monomial(sg, {rx[0], ry[1], rl[1], rl[1]});
  } while (std::next_permutation(perm.begin(), perm.end()));
  return s.sign();
}

}  // namespace detail

// +1 if a, b, c turn counter-clockwise, -1 clockwise, 0 collinear. Exact.
inline int orient(const Vec<2>& a, const Vec<2>& b, const Vec<2>& c) {
  const double detleft = (a[0] - c[0]) * (b[1] - c[1]);
  const double detright = (a[1] - c[1]) * (b[0] - c[0]);
  const double det = detleft - detright;
  const double errbound = detail::ccwerrboundA * (std::fabs(detleft) + std::fabs(detright));
  if (det > errbound) return 1;
  if (-det > errbound) return -1;
  return detail::orient_exact(a, b, c);
}

// +1 if d lies inside the circle through counter-clockwise a, b, c; 0 if cocircular. Exact.
inline int incircle(const Vec<2>& a, const Vec<2>& b, const Vec<2>& c, const Vec<2>& d) {
  const double adx = a[0] - d[0], ady = a[1] - d[1];
  const double bdx = b[0] - d[0], bdy = b[1] - d[1];
  const double cdx = c[0] - d[0], cdy = c[1] - d[1];
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * alift +
                           (std::fabs(cdxady) + std::fabs(adxcdy)) * blift +
                           (std::fabs(adxbdy) + std::fabs(bdxady)) * clift;
  const double errbound = detail::iccerrboundA * permanent;
  if (det > errbound) return 1;
  if (-det > errbound) return -1;
  return detail::incircle_exact(a, b, c, d);
}

}  // namespace ppnav::geom
