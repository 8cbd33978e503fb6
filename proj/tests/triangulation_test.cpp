#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "planwarp/errors.hpp"
#include "planwarp/triangulation.hpp"
#include "test_util.hpp"

using namespace planwarp;

namespace {

using Edge = std::pair<std::size_t, std::size_t>;

Edge key(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

oracle::Rational twice_area(const std::vector<Point2>& p, const TriangleIndices& t) {
  using oracle::q;
  return (q(p[t[1]].x) - q(p[t[0]].x)) * (q(p[t[2]].y) - q(p[t[0]].y)) -
         (q(p[t[1]].y) - q(p[t[0]].y)) * (q(p[t[2]].x) - q(p[t[0]].x));
}

/// Andrew's monotone chain, exact; returns twice the hull area.
oracle::Rational twice_hull_area(std::vector<Point2> p) {
  std::sort(p.begin(), p.end());
  std::vector<Point2> h;
  for (int pass = 0; pass < 2; ++pass) {
    const std::size_t start = h.size();
    for (const Point2& x : p) {
      while (h.size() >= start + 2 && oracle::orient(h[h.size() - 2], h.back(), x) <= 0) h.pop_back();
      h.push_back(x);
    }
    h.pop_back();
    std::reverse(p.begin(), p.end());
  }
  oracle::Rational a = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Point2 u = h[i], v = h[(i + 1) % h.size()];
    a += oracle::q(u.x) * oracle::q(v.y) - oracle::q(v.x) * oracle::q(u.y);
  }
  return a;
}

/// Checks CCW, exact coverage of the hull, manifold edges, constraint
/// presence and the (constrained) empty-circumcircle condition on every
/// unconstrained interior edge.
void check_triangulation(const std::vector<Point2>& pts, const std::vector<TriangleIndices>& tris,
                         const std::vector<Edge>& constraints) {
  std::map<Edge, std::vector<std::size_t>> edge_tris;
  oracle::Rational area = 0;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    ASSERT_EQ(oracle::orient(pts[tri[0]], pts[tri[1]], pts[tri[2]]), 1);
    area += twice_area(pts, tri);
    for (int k = 0; k < 3; ++k) edge_tris[key(tri[k], tri[(k + 1) % 3])].push_back(t);
  }
  EXPECT_EQ(area, twice_hull_area(pts));
  std::set<Edge> constrained;
  for (auto [a, b] : constraints) {
    constrained.insert(key(a, b));
    EXPECT_TRUE(edge_tris.count(key(a, b))) << "constraint " << a << "-" << b << " missing";
  }
  for (const auto& [e, ts] : edge_tris) {
    ASSERT_LE(ts.size(), 2u);
    if (ts.size() != 2 || constrained.count(e)) continue;
    const auto& t0 = tris[ts[0]];
    const auto& t1 = tris[ts[1]];
    std::size_t opposite = 0;
    for (std::size_t v : t1)
      if (v != e.first && v != e.second) opposite = v;
    EXPECT_FALSE(oracle::strictly_in_circumcircle(pts[t0[0]], pts[t0[1]], pts[t0[2]], pts[opposite]));
  }
  if (constraints.empty()) {
    // Unconstrained: globally empty circumcircles.
    for (const auto& t : tris)
      for (std::size_t v = 0; v < pts.size(); ++v)
        if (v != t[0] && v != t[1] && v != t[2])
          ASSERT_FALSE(oracle::strictly_in_circumcircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[v]));
  }
}

}  // namespace

TEST(Triangulate, SquareGivesTwoTriangles) {
  const std::vector<Point2> sq{{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  const auto tris = triangulate(sq);
  EXPECT_EQ(tris.size(), 2u);
  check_triangulation(sq, tris, {});
}

TEST(Triangulate, Deterministic) {
  std::mt19937_64 rng(1);
  const auto pts = pwtest::random_points(rng, 40, 100, 50);
  EXPECT_EQ(triangulate(pts), triangulate(pts));
}

TEST(Triangulate, Errors) {
  auto kind = [](auto f) {
    try {
      f();
    } catch (const MappingError& e) {
      return e.kind();
    }
    return MappingErrorKind::InvalidConstraint;
  };
  EXPECT_EQ(kind([] { triangulate(std::vector<Point2>{{0, 0}, {1, 0}}); }), MappingErrorKind::TooFewPairs);
  EXPECT_EQ(kind([] { triangulate(std::vector<Point2>{{0, 0}, {1, 1}, {2, 2}, {5, 5}}); }), MappingErrorKind::Collinear);
  EXPECT_EQ(kind([] { triangulate(std::vector<Point2>{{0, 0}, {1, 0}, {0, 1}, {1, 0}}); }),
            MappingErrorKind::DuplicatePoint);
  const std::vector<Point2> sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}};
  EXPECT_THROW(triangulate(sq, std::vector<IndexEdge>{{0, 9}}), MappingError);
  // (0,0)-(2,2) passes through vertex 4.
  EXPECT_THROW(triangulate(sq, std::vector<IndexEdge>{{0, 2}}), MappingError);
  // Crossing constraints.
  const std::vector<Point2> quad{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_THROW(triangulate(quad, std::vector<IndexEdge>{{0, 2}, {1, 3}}), MappingError);
}

TEST(Triangulate, CollinearPointsOnHull) {
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {1.5, 2}};
  const auto tris = triangulate(pts);
  EXPECT_EQ(tris.size(), 3u);
  check_triangulation(pts, tris, {});
}

TEST(Triangulate, PropertyRandomDelaunay) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    auto pts = pwtest::random_points(rng, 4 + trial % 40, 200, 120);
    if (trial % 3 == 0) {
      // Lattice inputs: many co-circular and collinear quadruples.
      for (Point2& p : pts) p = {std::round(p.x / 40) * 40, std::round(p.y / 40) * 40};
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      std::shuffle(pts.begin(), pts.end(), rng);
    }
    check_triangulation(pts, triangulate(pts), {});
  }
}

TEST(Triangulate, PropertyConstrained) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const auto pts = pwtest::random_points(rng, 8 + trial % 30, 100, 100);
    std::vector<Edge> cons;
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    for (int attempt = 0; attempt < 30 && cons.size() < 6; ++attempt) {
      const std::size_t a = pick(rng), b = pick(rng);
      if (a == b) continue;
      bool ok = true;
      for (std::size_t v = 0; v < pts.size() && ok; ++v)
        if (v != a && v != b && oracle::on_closed_segment(pts[v], pts[a], pts[b])) ok = false;
      for (auto [c, d] : cons) {
        if (!ok) break;
        if (c == a || c == b || d == a || d == b) {
          if (key(a, b) == key(c, d)) ok = false;
          continue;
        }
        const int o1 = oracle::orient(pts[a], pts[b], pts[c]), o2 = oracle::orient(pts[a], pts[b], pts[d]);
        const int o3 = oracle::orient(pts[c], pts[d], pts[a]), o4 = oracle::orient(pts[c], pts[d], pts[b]);
        if (o1 * o2 <= 0 && o3 * o4 <= 0) ok = false;
      }
      if (ok) cons.push_back({a, b});
    }
    const auto tris = triangulate(pts, cons);
    check_triangulation(pts, tris, cons);
  }
}
