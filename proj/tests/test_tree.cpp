#include <gtest/gtest.h>

#include <sstream>

#include <ppnav/tree.hpp>

using namespace ppnav;

namespace {

// 0 = root; 1 -> 0, 2 -> 1, 3 -> 1, 4 -> 3
NavTree small_tree() {
  const std::vector<std::size_t> par{0, 0, 1, 1, 3};
  return build_tree(par.size(), 0, [&](std::size_t i) { return par[i]; });
}

}  // namespace

TEST(BuildTree, HopCounts) {
  const auto t = small_tree();
  EXPECT_EQ(t.h, (std::vector<std::size_t>{0, 1, 2, 2, 3}));
  EXPECT_EQ(t.max_h(), 3u);
  EXPECT_EQ(tree_path(t, 4), (std::vector<std::size_t>{4, 3, 1, 0}));
}

TEST(BuildTree, CycleDetected) {
  const std::vector<std::size_t> par{0, 2, 1};
  EXPECT_THROW(build_tree(3, 0, [&](std::size_t i) { return par[i]; }), RuntimeFailure);
}

TEST(BuildTree, BallAndProfile) {
  const auto t = small_tree();
  EXPECT_EQ(tree_ball(t, 0), std::vector<std::size_t>{});
  EXPECT_EQ(tree_ball(t, 2), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(tree_ball_profile(t), (std::vector<std::size_t>{0, 1, 3, 4}));
}

TEST(BuildTree, ThreadsDoNotChangeResult) {
  const auto ps = palm_add(sample_ppp(Window<2>::ball(25), 3), {Vec<2>{}});
  const SpatialIndex<2> idx(ps);
  const auto a = build_radial_tree(ps, idx, 1), b = build_radial_tree(ps, idx, 3);
  EXPECT_EQ(a.parent, b.parent);
  EXPECT_EQ(a.h, b.h);
  const auto tri = triangulate(ps);
  EXPECT_EQ(build_compass_tree(tri, 1).parent, build_compass_tree(tri, 4).parent);
  DenseSmallWorld<2> sw(ps, ModelParams{2, 3.0, 1.0}, 5);
  EXPECT_EQ(build_small_world_tree(sw, 1).parent, build_small_world_tree(sw, 2).parent);
}

TEST(BuildTree, AgreesWithSinglePaths) {
  const auto ps = palm_add(sample_ppp(Window<2>::ball(20), 8), {Vec<2>{}});
  const SpatialIndex<2> idx(ps);
  const auto t = build_radial_tree(ps, idx);
  for (std::size_t i = 1; i < ps.size(); i += 11) {
    const auto p = navigate_radial(ps, idx, i, NavMode::toward_origin, NavLimits{});
    EXPECT_EQ(p.indices, tree_path(t, i));
  }
}

TEST(PathMetrics, HandExample) {
  const std::vector<Vec<2>> pts{{4, 0}, {3, 1}, {0, -2}, {0, 0}};
  const auto m = path_metrics<2>(pts, [](const Vec<2>& a, const Vec<2>& b) { return dist(a, b) * dist(a, b); });
  EXPECT_EQ(m.H, 3u);
  EXPECT_DOUBLE_EQ(m.Delta, 2.0);
  EXPECT_NEAR(m.euclid_len, std::sqrt(2.0) + std::sqrt(18.0) + 2.0, 1e-14);
  EXPECT_NEAR(m.G, 2.0 + 18.0 + 4.0, 1e-12);
}

TEST(OffspringCone, FlagsWideDescendant) {
  // 1 = (100, 0) has descendant 2 at angle 0.5 rad; bound 100^(-0.5) = 0.1
  const std::vector<Vec<2>> pts{{0, 0}, {100, 0}, {50 * std::cos(0.5), 50 * std::sin(0.5)}};
  const std::vector<std::size_t> par{0, 0, 1};
  const auto t = build_tree(3, 0, [&](std::size_t i) { return par[i]; });
  EXPECT_EQ(offspring_cone_check<2>(t, pts, 0.5), std::vector<std::size_t>{1});
  EXPECT_THROW(offspring_cone_check<2>(t, pts, 1.0), InputError);
}

TEST(Transverse, RecursionExactAndLemmaHolds) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    ModelParams p{2, 2.5, 1.0};
    const auto path = navigate_small_world<2>(p, Vec<2>{2000.0, 0.0}, NavMode::toward_origin, NavLimits{}, s);
    const auto tr = transverse_decomposition(path.points, Vec<2>{1, 0}, Vec<2>{0, 1});
    EXPECT_LT(tr.max_residual, 1e-12);
    EXPECT_EQ(tr.lemma_violations, 0u);
    EXPECT_EQ(tr.p.size(), path.H());
  }
}

TEST(Transverse, StraightPathHasZeroV) {
  const std::vector<Vec<2>> pts{{5, 0}, {3, 0}, {1, 0}, {0, 0}};
  const auto tr = transverse_decomposition(pts, Vec<2>{1, 0}, Vec<2>{0, 1});
  for (double v : tr.V) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(tr.p, (std::vector<double>{2, 2, 1}));
  EXPECT_EQ(tr.S.back(), 2.0);
}

TEST(TreeCsv, Rows) {
  std::ostringstream os;
  write_tree_csv(os, small_tree());
  EXPECT_EQ(os.str(), "child,parent,h\n0,0,0\n1,0,1\n2,1,2\n3,1,2\n4,3,3\n");
}
