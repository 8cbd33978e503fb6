#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "planwarp/errors.hpp"
#include "planwarp/geometry.hpp"
#include "test_util.hpp"

using namespace planwarp;

namespace {

void expect_bary(const Barycentric& b, double l0, double l1, double l2) {
  EXPECT_NEAR(b.l0, l0, 1e-15);
  EXPECT_NEAR(b.l1, l1, 1e-15);
  EXPECT_NEAR(b.l2, l2, 1e-15);
}

}  // namespace

TEST(Barycentric, UnitTriangleInterior) {
  expect_bary(barycentric({{0, 0}, {1, 0}, {0, 1}}, {0.25, 0.25}), 0.5, 0.25, 0.25);
}

TEST(Barycentric, VertexIsUnitWeight) {
  const Triangle t{{0, 0}, {1, 0}, {0, 1}};
  expect_bary(barycentric(t, t.v1), 0, 1, 0);
}

TEST(Barycentric, HypotenuseMidpoint) {
  expect_bary(barycentric({{0, 0}, {2, 0}, {0, 2}}, {1, 1}), 0, 0.5, 0.5);
}

TEST(Barycentric, DegenerateTriangleThrows) {
  EXPECT_THROW(barycentric({{0, 0}, {1, 1}, {2, 2}}, {0.5, 0.5}), GeometryError);
  EXPECT_THROW(barycentric({{0, 0}, {0, 0}, {1, 0}}, {0.5, 0.5}), GeometryError);
}

TEST(ApplyBarycentric, VertexAndCentroid) {
  const Triangle t{{0, 0}, {3, 0}, {0, 3}};
  EXPECT_EQ(apply_barycentric(t, {1, 0, 0}), t.v0);
  const Point2 c = apply_barycentric(t, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_NEAR(c.x, 1.0, 1e-15);
  EXPECT_NEAR(c.y, 1.0, 1e-15);
}

TEST(Barycentric, PropertyRoundTripAndPartitionOfUnity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-100, 100);
  int checked = 0;
  while (checked < 2000) {
    const Triangle t{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
    if (t.degenerate()) continue;
    const Point2 p{u(rng), u(rng)};
    const Barycentric b = barycentric(t, p);
    EXPECT_NEAR(b.sum(), 1.0, 1e-9);
    EXPECT_LT(distance(apply_barycentric(t, b), p), 1e-9 * std::max(1.0, norm(p)));
    // Inside iff all weights non-negative, checked against the exact oracle.
    const int o0 = oracle::orient(t.v1, t.v2, p), o1 = oracle::orient(t.v2, t.v0, p), o2 = oracle::orient(t.v0, t.v1, p);
    const int s = oracle::orient(t.v0, t.v1, t.v2);
    const bool strictly_in = o0 == s && o1 == s && o2 == s;
    const bool strictly_out = o0 == -s || o1 == -s || o2 == -s;
    if (strictly_in) EXPECT_TRUE(b.inside(0.0));
    if (strictly_out && b.min() < -1e-6) EXPECT_FALSE(b.inside());
    ++checked;
  }
}

TEST(Triangle, DegenerateUsesRelativeThreshold) {
  EXPECT_FALSE((Triangle{{0, 0}, {1e-6, 0}, {0, 1e-6}}).degenerate());
  EXPECT_TRUE((Triangle{{0, 0}, {1, 0}, {2, 1e-14}}).degenerate());
  EXPECT_FALSE((Triangle{{0, 0}, {1, 0}, {0.5, 1e-3}}).degenerate());
}

TEST(Locate, InsideOutsideAndTieRule) {
  // Five triangles; triangles 1 and 4 share the edge (10,0)-(10,10).
  const std::vector<Triangle> tris{
      {{100, 100}, {101, 100}, {100, 101}},
      {{0, 0}, {10, 0}, {10, 10}},
      {{200, 200}, {201, 200}, {200, 201}},
      {{20, 20}, {30, 20}, {20, 30}},
      {{10, 0}, {20, 0}, {10, 10}},
  };
  EXPECT_EQ(locate(tris, {22, 22}), std::optional<std::size_t>(3));
  EXPECT_EQ(locate(tris, {10, 5}), std::optional<std::size_t>(1));
  EXPECT_EQ(locate(tris, {10, 0}), std::optional<std::size_t>(1));
  EXPECT_EQ(locate(tris, {-5, -5}), std::nullopt);
}

TEST(Polyline, RejectsBadInput) {
  EXPECT_THROW(Polyline({{0, 0}}), GeometryError);
  EXPECT_THROW(Polyline({{0, 0}, {0, 0}}), GeometryError);
  EXPECT_THROW(Polyline({{0, 0}, {std::nan(""), 0}}), GeometryError);
}

TEST(Polyline, ArcLength) {
  const Polyline pl({{0, 0}, {3, 0}, {3, 4}});
  EXPECT_DOUBLE_EQ(pl.length(), 7.0);
  EXPECT_DOUBLE_EQ(pl.arc_length_at(1), 3.0);
  EXPECT_EQ(pl.fraction_at(0), 0.0);
  EXPECT_EQ(pl.fraction_at(2), 1.0);
  EXPECT_EQ(pl.point_at(1.0), (Point2{3, 4}));
  EXPECT_EQ(pl.point_at(0.0), (Point2{0, 0}));
}

TEST(Resample, UniformOnSegment) {
  const auto pts = resample_by_arclength(Polyline({{0, 0}, {10, 0}}), 6);
  ASSERT_EQ(pts.size(), 6u);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(pts[i].x, 2.0 * i, 1e-12);
    EXPECT_EQ(pts[i].y, 0.0);
  }
}

TEST(Resample, TwoSamplesAreEndpoints) {
  const auto pts = resample_by_arclength(Polyline({{0, 0}, {3, 0}, {3, 4}}), 2);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0], (Point2{0, 0}));
  EXPECT_EQ(pts[1], (Point2{3, 4}));
}

TEST(Resample, MidpointWalksAcrossTheCorner) {
  const auto pts = resample_by_arclength(Polyline({{0, 0}, {3, 0}, {3, 4}}), 3);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_NEAR(pts[1].x, 3.0, 1e-12);
  EXPECT_NEAR(pts[1].y, 0.5, 1e-12);
}

TEST(Resample, RejectsFewerThanTwo) {
  EXPECT_THROW(resample_by_arclength(Polyline({{0, 0}, {1, 0}}), 1), GeometryError);
}

TEST(Resample, PropertyEqualSpacingAlongCurve) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point2> v;
    for (int i = 0; i < 6; ++i) v.push_back({u(rng), u(rng)});
    const Polyline pl(v);
    const std::size_t n = 2 + trial % 20;
    const auto pts = resample_by_arclength(pl, n);
    ASSERT_EQ(pts.size(), n);
    EXPECT_EQ(pts.front(), pl.front());
    EXPECT_EQ(pts.back(), pl.back());
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 want = pl.point_at(static_cast<double>(i) / static_cast<double>(n - 1));
      EXPECT_LT(distance(pts[i], want), 1e-9);
    }
  }
}

TEST(SimplePolygon, Classification) {
  EXPECT_TRUE(is_simple_polygon(std::vector<Point2>{{0, 0}, {1, 0}, {0, 1}}));
  EXPECT_FALSE(is_simple_polygon(std::vector<Point2>{{0, 0}, {1, 1}, {1, 0}, {0, 1}}));
  EXPECT_FALSE(is_simple_polygon(std::vector<Point2>{{0, 0}, {2, 0}, {1, 0}, {1, 1}}));
  EXPECT_FALSE(is_simple_polygon(std::vector<Point2>{{0, 0}, {1, 0}}));
  EXPECT_FALSE(is_simple_polygon(std::vector<Point2>{{0, 0}, {1, 0}, {1, 0}, {0, 1}}));
  // Vertex touching a non-adjacent edge.
  EXPECT_FALSE(is_simple_polygon(std::vector<Point2>{{0, 0}, {4, 0}, {4, 4}, {2, 0}, {0, 4}}));
}

TEST(StrictlyInside, MatchesExactOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 20);
  std::uniform_int_distribution<int> grid_coord(0, 40);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ring = pwtest::random_star_polygon(rng, {10, 10}, 2, 9, 12);
    for (int i = 0; i < 200; ++i) {
      // Mix of random points and lattice points that often hit the boundary.
      const Point2 p = i % 2 ? Point2{u(rng), u(rng)} : Point2{grid_coord(rng) * 0.5, grid_coord(rng) * 0.5};
      EXPECT_EQ(strictly_inside_polygon(ring, p), oracle::strictly_inside(ring, p));
    }
    for (const Point2& v : ring) EXPECT_FALSE(strictly_inside_polygon(ring, v));
  }
}
