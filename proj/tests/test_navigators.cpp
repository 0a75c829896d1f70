#include <gtest/gtest.h>

#include <ppnav/analytic.hpp>
#include <ppnav/navigators.hpp>
#include <ppnav/stats.hpp>

using namespace ppnav;

namespace {

ModelParams params(double beta, double c = 1.0) {
  ModelParams p;
  p.beta = beta;
  p.c = c;
  return p;
}

PointSet<2> fixed_set(std::vector<Vec<2>> pts, double R = 10.0) {
  PointSet<2> ps;
  ps.window = Window<2>::ball(R);
  ps.points = std::move(pts);
  return ps;
}

}  // namespace

TEST(ScaledProgress, Conventions) {
  const Vec<2> X{3.0, 4.0};
  EXPECT_DOUBLE_EQ(scaled_progress(X, Vec<2>{5.0, 0.0}), 0.0);
  EXPECT_NEAR(scaled_progress(X, (1.0 / std::exp(1.0)) * X), 1.0, 1e-15);
  EXPECT_TRUE(std::isinf(scaled_progress(X, Vec<2>{})));
  EXPECT_THROW(scaled_progress(Vec<2>{}, X), InputError);
}

TEST(RadialStep, HandExample) {
  const auto ps = fixed_set({{0, 0}, {4, 0}, {1, 0}, {2, 2}});
  const SpatialIndex<2> idx(ps);
  EXPECT_EQ(radial_step(idx, ps[1], NavMode::toward_origin), 3u);
}

TEST(RadialStep, OnlyOriginInRegion) {
  const auto ps = fixed_set({{0, 0}, {4, 0}, {5, 1}});
  const SpatialIndex<2> idx(ps);
  EXPECT_EQ(radial_step(idx, ps[1], NavMode::toward_origin), 0u);
}

TEST(RadialStep, EmptyRegionIsBoundaryExhaustion) {
  const auto ps = fixed_set({{0, 0}, {4, 0}, {1, 1}});
  const SpatialIndex<2> idx(ps);
  EXPECT_THROW(radial_step(idx, ps[1], NavMode::directed), BoundaryExhaustion);
}

TEST(RadialStep, MatchesBruteForce) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto ps = palm_add(sample_ppp(Window<2>::ball(17.8), s), {Vec<2>{}});  // about 10^3 points
    const SpatialIndex<2> idx(ps);
    for (std::size_t i = 1; i < ps.size(); i += 7) {
      const auto& X = ps[i];
      std::size_t best = npos;
      for (std::size_t j = 0; j < ps.size(); ++j) {
        if (!(norm2(ps[j]) < norm2(X))) continue;
        if (best == npos || dist2(X, ps[j]) < dist2(X, ps[best])) best = j;
      }
      ASSERT_EQ(radial_step(idx, X, NavMode::toward_origin), best);
    }
  }
}

TEST(CompassStep, NeighborOnSegmentSelected) {
  const auto tri = triangulate(std::vector<Vec<2>>{{0, 0}, {4, 0}, {2, 0.0001}, {2, 3}, {2, -3}});
  // (2, 1e-4) is almost on XO; O itself is not a Delaunay neighbor of X here
  EXPECT_EQ(compass_step(tri, 1, NavMode::toward_origin), 2u);
}

TEST(CompassStep, TieGoesToLowestIndex) {
  const double t = std::tan(std::numbers::pi / 6);
  const auto tri = triangulate(std::vector<Vec<2>>{{-5, 0}, {2, 0}, {1, t}, {1, -t}, {5, 5}});
  const auto& nb = tri.neighbors(1);
  ASSERT_TRUE(std::find(nb.begin(), nb.end(), 2) != nb.end());
  ASSERT_TRUE(std::find(nb.begin(), nb.end(), 3) != nb.end());
  EXPECT_EQ(compass_step(tri, 1, NavMode::toward_origin), 2u);
}

TEST(CompassNavigation, TerminatesWithoutRepeats) {
  Rng r(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto ps = palm_add(sample_ppp(Window<2>::ball(6), 500 + trial), {Vec<2>{}});
    if (ps.size() < 4) continue;
    const auto tri = triangulate(ps);
    const std::size_t s = 1 + uniform_int(r, ps.size() - 1);
    const auto path = navigate_compass(tri, s, NavMode::toward_origin, NavLimits{});
    ASSERT_EQ(path.termination, Termination::absorbed);
    std::vector<std::size_t> v = path.indices;
    std::sort(v.begin(), v.end());
    ASSERT_EQ(std::adjacent_find(v.begin(), v.end()), v.end());
  }
}

TEST(SmallWorld, StartAtOrigin) {
  const auto path = navigate_small_world<2>(params(3), Vec<2>{}, NavMode::toward_origin, NavLimits{}, 1);
  EXPECT_EQ(path.H(), 0u);
  EXPECT_EQ(path.termination, Termination::absorbed);
  NavState<2> st(params(3), NavMode::toward_origin, Vec<2>{}, 1);
  EXPECT_THROW(st.advance(), InputError);
}

TEST(SmallWorld, NormsDecreaseAndAbsorb) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto path = navigate_small_world<2>(params(2.5), Vec<2>{300.0, 40.0}, NavMode::toward_origin, NavLimits{}, s);
    ASSERT_EQ(path.termination, Termination::absorbed);
    for (std::size_t k = 0; k + 1 < path.points.size(); ++k)
      ASSERT_LT(norm(path.points[k + 1]), norm(path.points[k]));
  }
}

TEST(SmallWorld, Reproducible) {
  const auto a = navigate_small_world<2>(params(2), Vec<2>{1e4, 0}, NavMode::toward_origin, NavLimits{}, 9);
  const auto b = navigate_small_world<2>(params(2), Vec<2>{1e4, 0}, NavMode::toward_origin, NavLimits{}, 9);
  EXPECT_EQ(a.points, b.points);
}

TEST(SmallWorld, StepLimitReturnsPartialPath) {
  const auto p = navigate_small_world<2>(params(5), Vec<2>{}, NavMode::directed, NavLimits{5}, 3);
  EXPECT_EQ(p.termination, Termination::step_limit);
  EXPECT_EQ(p.H(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_GT(p.points[k + 1][0], p.points[k][0]);
}

TEST(SmallWorld, DirectedNeedsBetaAboveD) {
  EXPECT_THROW(NavState<2>(params(2), NavMode::directed, Vec<2>{}, 1), InputError);
}

// First draw from X_0: conditioned count = E N / P(N > 0) with N = Bern(f(|X|)) + Poisson(ball mass).
TEST(SmallWorld, FirstDrawCountMatchesQuadrature) {
  const auto p = params(3);
  const double x = 20.0;
  const double lam = ball_neighbor_mass(p, x).value, fo = p.f(x);
  const double expect = (fo + lam) / (1.0 - (1.0 - fo) * std::exp(-lam));
  std::vector<double> n(20000);
  for (std::size_t i = 0; i < n.size(); ++i) {
    NavState<2> st(p, NavMode::toward_origin, Vec<2>{x, 0}, 100 + i);
    const auto d = st.draw_neighbors();
    n[i] = double(d.existing.size() + d.fresh.size());
  }
  EXPECT_NEAR(mean(n), expect, 4 * std_error(n));
}

TEST(SmallWorld, ConditioningCapReported) {
  NavState<2>::Options opt;
  opt.max_rounds = 1;
  // tiny c: a single round is usually empty
  int failures = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    ModelParams p = params(40.0, 1e-6);
    NavState<2> st(p, NavMode::directed, Vec<2>{}, s, opt);
    try {
      st.advance();
    } catch (const ConditioningFailure& e) {
      ++failures;
      EXPECT_NE(std::string(e.what()).find("conditioning failure"), std::string::npos);
    }
  }
  EXPECT_GT(failures, 0);
}

TEST(DenseSmallWorld, TreeParentsDecreaseNorm) {
  const auto ps = palm_add(sample_ppp(Window<2>::ball(15), 4), {Vec<2>{}});
  DenseSmallWorld<2> g(ps, params(3), 4);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i == g.origin()) continue;
    ASSERT_LT(norm(ps[g.next(i)]), norm(ps[i]));
  }
}

TEST(RotationEquivariance, RadialAndCompassQuarterTurn) {
  const auto ps = palm_add(sample_ppp(Window<2>::ball(20), 6), {Vec<2>{}});
  PointSet<2> rot = ps;
  for (auto& q : rot.points) q = Vec<2>{-q[1], q[0]};
  const SpatialIndex<2> a(ps), b(rot);
  const auto ta = triangulate(ps), tb = triangulate(rot);
  for (std::size_t s = 1; s < ps.size(); s += 13) {
    EXPECT_EQ(navigate_radial(ps, a, s, NavMode::toward_origin, NavLimits{}).indices,
              navigate_radial(rot, b, s, NavMode::toward_origin, NavLimits{}).indices);
    EXPECT_EQ(navigate_compass(ta, s, NavMode::toward_origin, NavLimits{}).indices,
              navigate_compass(tb, s, NavMode::toward_origin, NavLimits{}).indices);
  }
}

TEST(PathCsv, HeaderAndRows) {
  const auto ps = fixed_set({{0, 0}, {4, 0}, {1, 0}, {2, 2}});
  const SpatialIndex<2> idx(ps);
  const auto path = navigate_radial(ps, idx, 1, NavMode::toward_origin, NavLimits{});
  std::ostringstream os;
  write_path_csv(os, path);
  const std::string s = os.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), std::ptrdiff_t(path.points.size() + 1));
}
