#include <gtest/gtest.h>

#include <ppnav/stats.hpp>

using namespace ppnav;

TEST(Moments, Basic) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(mean(x), 2.5);
  EXPECT_NEAR(variance(x), 5.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
  const std::vector<double> s{1, 2, 2, 3};
  EXPECT_DOUBLE_EQ(empirical_tail(s, 2.0), 0.25);
  EXPECT_DOUBLE_EQ(empirical_tail(s, 0.0), 1.0);
}

TEST(Kolmogorov, KnownQuantiles) {
  EXPECT_NEAR(kolmogorov_q(1.3581), 0.05, 2e-4);
  EXPECT_NEAR(kolmogorov_q(1.6276), 0.01, 1e-4);
  EXPECT_EQ(kolmogorov_q(0.1), 1.0);
}

TEST(Ks, UniformSampleAccepted) {
  Rng r(5);
  std::vector<double> x(5000);
  for (auto& v : x) v = uniform01(r);
  const auto k = ks_one_sample(x, [](double t) { return std::clamp(t, 0.0, 1.0); });
  EXPECT_GT(k.p_value, 0.01);
  const auto bad = ks_one_sample(x, [](double t) { return std::clamp(t * t, 0.0, 1.0); });
  EXPECT_LT(bad.p_value, 1e-6);
}

TEST(Ks, TwoSampleHandExample) {
  const auto k = ks_two_sample({1, 2, 3}, {1.5, 2.5, 3.5, 4.5});
  EXPECT_NEAR(k.D, 0.5, 1e-15);
  const auto same = ks_two_sample({1, 2, 3}, {1, 2, 3});
  EXPECT_EQ(same.D, 0.0);
}

TEST(ChiSquare, TwoDofIsExponential) {
  EXPECT_NEAR(chi_square_pvalue(2.0, 2.0), std::exp(-1.0), 1e-14);
  EXPECT_EQ(chi_square_pvalue(0.0, 3.0), 1.0);
}

TEST(Ols, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto g = ols(x, y);
  EXPECT_NEAR(g.slope, 2.0, 1e-14);
  EXPECT_NEAR(g.intercept, 1.0, 1e-14);
  EXPECT_NEAR(g.r2, 1.0, 1e-14);
  EXPECT_NEAR(g.slope_se, 0.0, 1e-14);
  EXPECT_THROW(ols(std::vector<double>{1, 1}, std::vector<double>{0, 1}), InsufficientData);
}

TEST(BatchMeans, Shape) {
  std::vector<double> x(100);
  std::iota(x.begin(), x.end(), 0.0);
  const auto b = batch_means(x, 4);
  EXPECT_EQ(b.batches, 4u);
  EXPECT_DOUBLE_EQ(b.mean, 49.5);
  EXPECT_THROW(batch_means(x, 1), InsufficientData);
}

TEST(TailExponent, ParetoSlope) {
  Rng r(2);
  std::vector<double> x(200000);
  for (auto& v : x) v = std::pow(uniform_pos(r), -1.0 / 3.0);
  const auto f = tail_exponent(x, 1.5);
  EXPECT_NEAR(f.fit.slope, -3.0, 0.1);
  EXPECT_THROW(tail_exponent(x, 1e3), InsufficientData);
}

TEST(Lag1, IidVersusRamp) {
  Rng r(4);
  std::vector<double> iid(2000), ramp(2000);
  for (std::size_t i = 0; i < iid.size(); ++i) {
    iid[i] = normal(r);
    ramp[i] = double(i);
  }
  Rng p(9);
  EXPECT_GT(lag1_permutation_pvalue(iid, 200, p), 0.01);
  EXPECT_LT(lag1_permutation_pvalue(ramp, 200, p), 0.01);
}

TEST(Energy, DetectsShift) {
  Rng r(6);
  std::vector<Vec<2>> a(150), b(150), c(150);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = {normal(r), normal(r)};
    b[i] = {normal(r), normal(r)};
    c[i] = {normal(r) + 1.0, normal(r)};
  }
  Rng p(7);
  EXPECT_GT(energy_test(a, b, 199, p).p_value, 0.01);
  EXPECT_LT(energy_test(a, c, 199, p).p_value, 0.01);
}
