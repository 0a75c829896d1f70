#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"
#include "rng.hpp"
#include "vec.hpp"

namespace ppnav {

inline double mean(std::span<const double> x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
}

// Unbiased sample variance.
inline double variance(std::span<const double> x) {
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / double(x.size() - 1);
}

inline double std_error(std::span<const double> x) { return std::sqrt(variance(x) / double(x.size())); }

inline double quantile(std::vector<double> x, double q) {
  require(!x.empty(), "quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const double pos = q * double(x.size() - 1);
  const auto i = std::size_t(std::floor(pos));
  if (i + 1 >= x.size()) return x.back();
  return x[i] + (pos - double(i)) * (x[i + 1] - x[i]);
}

inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

inline double binomial_se(double p, std::size_t n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / double(n)); }

// Empirical P(X > t).
inline double empirical_tail(std::span<const double> sorted, double t) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
  return double(sorted.end() - it) / double(sorted.size());
}

// Kolmogorov distribution tail P(K > x).
inline double kolmogorov_q(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.3) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
  double D = 0.0;
  double p_value = 1.0;
};

// One-sample KS against a continuous cdf.
inline KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  require(!x.empty(), "KS needs samples");
  std::sort(x.begin(), x.end());
  const double n = double(x.size());
  double D = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    D = std::max({D, double(i + 1) / n - F, F - double(i) / n});
  }
  const double sn = std::sqrt(n);
  return {D, kolmogorov_q((sn + 0.12 + 0.11 / sn) * D)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "KS needs samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    D = std::max(D, std::fabs(double(i) / na - double(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {D, kolmogorov_q((ne + 0.12 + 0.11 / ne) * D)};
}

inline double chi_square_pvalue(double stat, double dof) {
  require(dof > 0.0, "chi-square needs positive degrees of freedom");
  if (!(stat > 0.0)) return 1.0;
  return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

inline double dispersion_index(std::span<const double> counts) { return variance(counts) / mean(counts); }

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

inline Regression ols(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "regression needs paired samples");
  if (x.size() < 2) throw InsufficientData("regression needs at least 2 points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientData("regression needs distinct abscissae");
  Regression r;
  r.n = x.size();
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - r.intercept - r.slope * x[i];
    sse += e * e;
  }
  r.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  r.slope_se = x.size() > 2 ? std::sqrt(sse / double(x.size() - 2) / sxx) : 0.0;
  return r;
}

struct BatchMeans {
  double mean = 0.0;
  double se = 0.0;
  std::size_t batches = 0;
};

inline BatchMeans batch_means(std::span<const double> x, std::size_t batches) {
  if (batches < 2 || x.size() < batches) throw InsufficientData("batch means needs at least 2 nonempty batches");
  const std::size_t len = x.size() / batches;
  std::vector<double> m;
  for (std::size_t b = 0; b < batches; ++b) m.push_back(mean(x.subspan(b * len, len)));
  return {mean(m), std_error(m), batches};
}

struct TailFit {
  Regression fit;
  double t_min = 0.0;
  std::size_t exceedances = 0;
  std::vector<double> t, tail;  // regression grid
};

// Log-log least squares of the empirical tail above t_min on log-spaced points,
// keeping points with at least min_count exceedances.
inline TailFit tail_exponent(std::span<const double> samples, double t_min, std::size_t bins = 20,
                             std::size_t min_exceed = 1000, std::size_t min_count = 10) {
  require(t_min > 0.0, "tail exponent needs t_min > 0");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  TailFit out;
  out.t_min = t_min;
  out.exceedances = std::size_t(s.end() - std::upper_bound(s.begin(), s.end(), t_min));
  if (out.exceedances < min_exceed)
    throw InsufficientData("tail exponent needs at least " + std::to_string(min_exceed) + " samples above t_min, got " +
                           std::to_string(out.exceedances));
  // largest t still leaving min_count exceedances
  const double t_max = s[s.size() - min_count];
  if (!(t_max > t_min)) throw InsufficientData("no tail above t_min");
  std::vector<double> lx, ly;
  const double la = std::log(t_min), lb = std::log(t_max);
  for (std::size_t i = 0; i < bins; ++i) {
    const double t = std::exp(la + (lb - la) * double(i) / double(bins - 1));
    const double p = empirical_tail(s, t);
    if (p <= 0.0) continue;
    out.t.push_back(t);
    out.tail.push_back(p);
    lx.push_back(std::log(t));
    ly.push_back(std::log(p));
  }
  std::vector<double> ux = lx;
  std::sort(ux.begin(), ux.end());
  if (std::unique(ux.begin(), ux.end()) - ux.begin() < 2) throw InsufficientData("no tail above t_min");
  out.fit = ols(lx, ly);
  return out;
}

inline double lag1_correlation(std::span<const double> x) {
  if (x.size() < 3) return 0.0;
  const double m = mean(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - m) * (x[i] - m);
    if (i + 1 < x.size()) num += (x[i] - m) * (x[i + 1] - m);
  }
  return den > 0.0 ? num / den : 0.0;
}

inline void shuffle(std::vector<double>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_int(rng, i)]);
}

// Two-sided permutation p-value of the lag-1 autocorrelation.
inline double lag1_permutation_pvalue(std::span<const double> x, std::size_t perms, Rng& rng) {
  const double obs = std::fabs(lag1_correlation(x));
  std::vector<double> v(x.begin(), x.end());
  std::size_t ge = 0;
  for (std::size_t k = 0; k < perms; ++k) {
    shuffle(v, rng);
    if (std::fabs(lag1_correlation(v)) >= obs) ++ge;
  }
  return double(ge + 1) / double(perms + 1);
}

// Energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'| and its permutation p-value.
template <std::size_t D>
double energy_statistic(const std::vector<Vec<D>>& pool, std::size_t na, const std::vector<std::size_t>& perm) {
  const std::size_t n = pool.size(), nb = n - na;
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dd = dist(pool[perm[i]], pool[perm[j]]);
      const bool ai = i < na, aj = j < na;
      if (ai && aj) xx += dd;
      else if (!ai && !aj) yy += dd;
      else xy += dd;
    }
  return 2.0 * xy / (double(na) * double(nb)) - 2.0 * xx / (double(na) * double(na)) -
         2.0 * yy / (double(nb) * double(nb));
}

struct EnergyTest {
  double statistic = 0.0;
  double p_value = 1.0;
};

template <std::size_t D>
EnergyTest energy_test(const std::vector<Vec<D>>& a, const std::vector<Vec<D>>& b, std::size_t perms, Rng& rng) {
  require(!a.empty() && !b.empty(), "energy test needs samples");
  std::vector<Vec<D>> pool(a);
  pool.insert(pool.end(), b.begin(), b.end());
  std::vector<std::size_t> perm(pool.size());
  std::iota(perm.begin(), perm.end(), 0);
  EnergyTest t;
  t.statistic = energy_statistic(pool, a.size(), perm);
  std::size_t ge = 0;
  for (std::size_t k = 0; k < perms; ++k) {
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[uniform_int(rng, i)]);
    if (energy_statistic(pool, a.size(), perm) >= t.statistic) ++ge;
  }
  t.p_value = double(ge + 1) / double(perms + 1);
  return t;
}

}  // namespace ppnav
