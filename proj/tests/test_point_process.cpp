#include <gtest/gtest.h>

#include <ppnav/point_process.hpp>
#include <ppnav/spatial_index.hpp>
#include <ppnav/stats.hpp>

using namespace ppnav;

TEST(Window, Volumes) {
  EXPECT_NEAR(Window<2>::ball(10).volume(), 100 * std::numbers::pi, 1e-9);
  EXPECT_NEAR(Window<3>::ball(2).volume(), 4.0 / 3.0 * std::numbers::pi * 8, 1e-9);
  EXPECT_NEAR(Window<2>::annulus(1, 2).volume(), 3 * std::numbers::pi, 1e-9);
}

TEST(Window, RejectsBadRadii) {
  EXPECT_THROW(Window<2>::ball(-1).validate(), InputError);
  EXPECT_THROW(Window<2>::annulus(3, 2).validate(), InputError);
  EXPECT_THROW(Window<2>::ball(std::numeric_limits<double>::infinity()).validate(), InputError);
}

TEST(SamplePpp, PointsInsideAndDeterministic) {
  const auto w = Window<2>::annulus(2, 5);
  const auto a = sample_ppp(w, 17), b = sample_ppp(w, 17), c = sample_ppp(w, 18);
  EXPECT_EQ(a.points, b.points);
  EXPECT_NE(a.points, c.points);
  for (const auto& p : a.points) EXPECT_TRUE(w.contains(p));
}

TEST(SamplePpp, ZeroRadiusIsEmpty) { EXPECT_EQ(sample_ppp(Window<2>::ball(0.0), 1).size(), 0u); }

TEST(SamplePpp, CountMeanAndDispersion) {
  const auto w = Window<3>::ball(3);
  std::vector<double> n(3000);
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = double(sample_ppp(w, 1000 + i).size());
  EXPECT_NEAR(mean(n), w.volume(), 4 * std::sqrt(w.volume() / n.size()));
  EXPECT_NEAR(dispersion_index(n), 1.0, 0.1);
}

TEST(SamplePpp, RadialUniformity) {
  // |X|^2 / R^2 is uniform on [0,1] in d = 2
  const auto ps = sample_ppp(Window<2>::ball(20), 5);
  std::vector<double> u;
  for (const auto& p : ps.points) u.push_back(norm2(p) / 400.0);
  EXPECT_GT(ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value, 1e-3);
}

TEST(PalmAdd, OriginFirst) {
  const auto ps = sample_ppp(Window<2>::ball(5), 3);
  const auto pa = palm_add(ps, {Vec<2>{}, Vec<2>{1.0, 1.0}});
  ASSERT_EQ(pa.size(), ps.size() + 2);
  EXPECT_EQ(pa[0], (Vec<2>{0, 0}));
  EXPECT_EQ(pa[1], (Vec<2>{1, 1}));
  EXPECT_EQ(pa.palm_count, 2u);
  EXPECT_THROW(palm_add(ps, {Vec<2>{9.0, 0.0}}), InputError);
}

TEST(QueryBall, MatchesLinearScan) {
  const auto ps = sample_ppp(Window<2>::ball(25), 9);
  const SpatialIndex<2> idx(ps);
  Rng rng(4);
  for (int t = 0; t < 300; ++t) {
    const Vec<2> c{60 * uniform01(rng) - 30, 60 * uniform01(rng) - 30};
    const double r = 15 * uniform01(rng);
    std::vector<std::size_t> lin;
    for (std::size_t i = 0; i < ps.size(); ++i)
      if (dist2(ps[i], c) < r * r) lin.push_back(i);
    ASSERT_EQ(idx.query_ball(c, r), lin);
  }
}

TEST(QueryBall, ThreeDimensions) {
  const auto ps = sample_ppp(Window<3>::ball(6), 2);
  const SpatialIndex<3> idx(ps);
  const Vec<3> c{1, -2, 0.5};
  std::vector<std::size_t> lin;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (dist2(ps[i], c) < 9.0) lin.push_back(i);
  EXPECT_EQ(idx.query_ball(c, 3.0), lin);
  EXPECT_TRUE(idx.query_ball(c, 0.0).empty());
}

TEST(GeometryConstants, UnitBallAndSphere) {
  EXPECT_NEAR(unit_ball_volume(2), std::numbers::pi, 1e-15);
  EXPECT_NEAR(sphere_area(2), 2 * std::numbers::pi, 1e-15);
  EXPECT_NEAR(sphere_area(1), 2.0, 1e-15);
  EXPECT_NEAR(sphere_area(3), 4 * std::numbers::pi, 1e-14);
}
