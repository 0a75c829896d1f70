#include <gtest/gtest.h>
#include <gmpxx.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include <ppnav/delaunay.hpp>
#include <ppnav/point_process.hpp>

using namespace ppnav;

namespace {

int sgn(const mpq_class& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

int orient_q(const Vec<2>& a, const Vec<2>& b, const Vec<2>& c) {
  const mpq_class ax(a[0]), ay(a[1]), bx(b[0]), by(b[1]), cx(c[0]), cy(c[1]);
  return sgn((bx - ax) * (cy - ay) - (by - ay) * (cx - ax));
}

int incircle_q(const Vec<2>& a, const Vec<2>& b, const Vec<2>& c, const Vec<2>& d) {
  auto row = [&](const Vec<2>& p) {
    const mpq_class x = mpq_class(p[0]) - mpq_class(d[0]), y = mpq_class(p[1]) - mpq_class(d[1]);
    return std::array<mpq_class, 3>{x, y, x * x + y * y};
  };
  const auto A = row(a), B = row(b), C = row(c);
  const mpq_class det = A[0] * (B[1] * C[2] - B[2] * C[1]) - A[1] * (B[0] * C[2] - B[2] * C[0]) +
                        A[2] * (B[0] * C[1] - B[1] * C[0]);
  return sgn(det);
}

std::vector<Vec<2>> random_points(std::size_t n, std::uint64_t seed) {
  Rng r(seed);
  std::vector<Vec<2>> p(n);
  for (auto& q : p) q = {uniform01(r), uniform01(r)};
  return p;
}

}  // namespace

TEST(Predicates, SpecExamples) {
  EXPECT_EQ(geom::orient({0, 0}, {1, 0}, {0, 1}), 1);
  EXPECT_EQ(geom::orient({0, 0}, {0, 1}, {1, 0}), -1);
  EXPECT_EQ(geom::orient({0, 0}, {1, 1}, {2, 2}), 0);
  EXPECT_EQ(geom::incircle({0, 0}, {1, 0}, {0, 1}, {1, 1}), 0);
  EXPECT_EQ(geom::incircle({0, 0}, {2, 0}, {0, 2}, {0.5, 0.5}), incircle_q({0, 0}, {2, 0}, {0, 2}, {0.5, 0.5}));
  EXPECT_EQ(geom::incircle({0, 0}, {2, 0}, {0, 2}, {0.5, 0.5}), 1);
}

// Nearly degenerate inputs where naive double evaluation gets the sign wrong.
TEST(Predicates, MatchRationalArithmeticNearDegeneracy) {
  Rng r(12);
  int disagreements_naive = 0;
  for (int t = 0; t < 20000; ++t) {
    const double e = std::ldexp(uniform01(r), -50);
    const Vec<2> a{0.5 + e, 0.5}, b{12.0, 12.0}, c{24.0, 24.0 + std::ldexp(uniform01(r) - 0.5, -48)};
    const int exact = orient_q(a, b, c);
    ASSERT_EQ(geom::orient(a, b, c), exact);
    const double naive = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    disagreements_naive += (naive > 0) - (naive < 0) != exact;
  }
  EXPECT_GT(disagreements_naive, 0);
  for (int t = 0; t < 20000; ++t) {
    const double th = 2 * std::numbers::pi * uniform01(r);
    const Vec<2> a{1, 0}, b{0, 1}, c{-1, 0}, d{std::cos(th), std::sin(th)};
    ASSERT_EQ(geom::incircle(a, b, c, d), incircle_q(a, b, c, d));
  }
}

TEST(Triangulate, ThreePointsOneTriangle) {
  const auto t = triangulate(std::vector<Vec<2>>{{0, 0}, {1, 0}, {0, 1}});
  ASSERT_EQ(t.triangles.size(), 1u);
  EXPECT_EQ(t.sorted_triangles()[0], (std::array<std::size_t, 3>{0, 1, 2}));
}

TEST(Triangulate, SquareUsesLowestIndexDiagonal) {
  const auto t = triangulate(std::vector<Vec<2>>{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  ASSERT_EQ(t.triangles.size(), 2u);
  const auto n0 = delaunay_neighbors(t, 0);
  EXPECT_EQ(n0, (std::vector<std::size_t>{1, 2, 3}));
  // same square, indices relabelled: the diagonal still touches index 0
  const auto u = triangulate(std::vector<Vec<2>>{{1, 0}, {0, 0}, {0, 1}, {1, 1}});
  EXPECT_EQ(delaunay_neighbors(u, 0).size(), 3u);
}

TEST(Triangulate, RejectsDegenerateInput) {
  EXPECT_THROW(triangulate(std::vector<Vec<2>>{{0, 0}, {1, 1}, {2, 2}, {3, 3}}), InputError);
  EXPECT_THROW(triangulate(std::vector<Vec<2>>{{0, 0}, {1, 0}}), InputError);
  EXPECT_THROW(triangulate(std::vector<Vec<2>>{{0, 0}, {1, 0}, {1, 0}, {0, 1}}), InputError);
}

TEST(Triangulate, SquareWithCenter) {
  const auto t = triangulate(std::vector<Vec<2>>{{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}});
  EXPECT_EQ(delaunay_neighbors(t, 4).size(), 4u);
  EXPECT_EQ(t.triangles.size(), 4u);
}

TEST(Triangulate, EmptyCircumcircleExactOracle) {
  const auto pts = random_points(1000, 77);
  const auto t = triangulate(pts);
  for (const auto& tri : t.triangles) {
    ASSERT_EQ(orient_q(pts[tri[0]], pts[tri[1]], pts[tri[2]]), 1);
    for (std::size_t q = 0; q < pts.size(); q += 1) {
      if (q == tri[0] || q == tri[1] || q == tri[2]) continue;
      ASSERT_LE(incircle_q(pts[tri[0]], pts[tri[1]], pts[tri[2]], pts[q]), 0);
    }
  }
}

TEST(Triangulate, EulerRelation) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto pts = random_points(50 + 37 * s, s);
    const auto t = triangulate(pts);
    EXPECT_EQ(t.triangles.size(), 2 * pts.size() - 2 - t.hull.size());
  }
}

TEST(Triangulate, AdjacencySymmetricAndMatchesTriangles) {
  const auto pts = random_points(100, 3);
  const auto t = triangulate(pts);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& tri : t.triangles)
    for (int k = 0; k < 3; ++k) {
      const auto a = tri[k], b = tri[(k + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  std::set<std::pair<std::size_t, std::size_t>> adj;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& nb = delaunay_neighbors(t, i);
    EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
    for (auto j : nb) {
      const auto& back = delaunay_neighbors(t, j);
      EXPECT_TRUE(std::binary_search(back.begin(), back.end(), i));
      adj.insert({std::min(i, j), std::max(i, j)});
    }
  }
  EXPECT_EQ(adj, edges);
}

TEST(Triangulate, InsertionOrderIndependent) {
  const auto pts = random_points(300, 8);
  std::vector<std::size_t> perm(pts.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng r(2);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[uniform_int(r, i)]);
  std::vector<Vec<2>> q(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) q[i] = pts[perm[i]];
  const auto a = triangulate(pts), b = triangulate(q);
  std::set<std::array<std::size_t, 3>> ta, tb;
  for (auto tri : a.triangles) {
    std::sort(tri.begin(), tri.end());
    ta.insert(tri);
  }
  for (auto tri : b.triangles) {
    for (auto& v : tri) v = perm[v];
    std::sort(tri.begin(), tri.end());
    tb.insert(tri);
  }
  EXPECT_EQ(ta, tb);
}

TEST(Triangulate, TriangleCsvSorted) {
  const auto t = triangulate(random_points(30, 1));
  std::ostringstream os;
  write_triangles_csv(os, t);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, 6), "i,j,k\n");
  const auto st = t.sorted_triangles();
  EXPECT_TRUE(std::is_sorted(st.begin(), st.end()));
}
