#include "planwarp/triangulation.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "planwarp/errors.hpp"
#include "planwarp/predicates.hpp"

namespace planwarp {
namespace {

using predicates::incircle;
using predicates::orient;

std::uint64_t edge_key(std::size_t a, std::size_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}
std::uint64_t undirected_key(std::size_t a, std::size_t b) {
  return a < b ? edge_key(a, b) : edge_key(b, a);
}

// Triangle soup with a directed-edge index: edge a->b maps to the triangle
// that contains it in counter-clockwise order.
class Mesh {
 public:
  explicit Mesh(std::span<const Point2> pts) : pts_(pts) {}

  std::size_t add(std::size_t a, std::size_t b, std::size_t c) {
    tris_.push_back({a, b, c});
    link(tris_.size() - 1);
    return tris_.size() - 1;
  }

  // Apex of the triangle on the left of a->b, if any.
  std::optional<std::size_t> apex(std::size_t a, std::size_t b) const {
    const auto it = edges_.find(edge_key(a, b));
    if (it == edges_.end()) return std::nullopt;
    const TriangleIndices& t = tris_[it->second];
    for (int i = 0; i < 3; ++i) {
      if (t[i] == a) return t[(i + 2) % 3];
    }
    return std::nullopt;
  }

  bool has_edge(std::size_t a, std::size_t b) const {
    return edges_.contains(edge_key(a, b)) || edges_.contains(edge_key(b, a));
  }

  bool interior(std::size_t a, std::size_t b) const {
    return edges_.contains(edge_key(a, b)) && edges_.contains(edge_key(b, a));
  }

  // Replaces the two triangles sharing a-b with the two sharing c-d, where
  // c is the apex left of a->b and d the apex left of b->a.
  void flip(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    const std::size_t t1 = edges_.at(edge_key(a, b));
    const std::size_t t2 = edges_.at(edge_key(b, a));
    unlink(t1);
    unlink(t2);
    tris_[t1] = {a, d, c};
    tris_[t2] = {d, b, c};
    link(t1);
    link(t2);
  }

  const std::vector<TriangleIndices>& triangles() const { return tris_; }
  const Point2& pt(std::size_t i) const { return pts_[i]; }

 private:
  void link(std::size_t t) {
    const TriangleIndices& v = tris_[t];
    for (int i = 0; i < 3; ++i) edges_[edge_key(v[i], v[(i + 1) % 3])] = t;
  }
  void unlink(std::size_t t) {
    const TriangleIndices& v = tris_[t];
    for (int i = 0; i < 3; ++i) edges_.erase(edge_key(v[i], v[(i + 1) % 3]));
  }

  std::span<const Point2> pts_;
  std::vector<TriangleIndices> tris_;
  std::unordered_map<std::uint64_t, std::size_t> edges_;
};

// Incremental sweep in lexicographic order: each new point is outside the
// current hull and is fanned to every hull edge it sees.
void sweep(Mesh& mesh, std::span<const Point2> pts, const std::vector<std::size_t>& order) {
  std::size_t k = 2;
  while (k < order.size() && orient(pts[order[0]], pts[order[1]], pts[order[k]]) == 0) ++k;
  if (k == order.size()) throw MappingError(MappingErrorKind::Collinear, "all points are collinear");

  const bool left = orient(pts[order[0]], pts[order[1]], pts[order[k]]) > 0;
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    if (left) {
      mesh.add(order[i], order[i + 1], order[k]);
    } else {
      mesh.add(order[i + 1], order[i], order[k]);
    }
  }
  if (left) {
    for (std::size_t i = 0; i < k; ++i) hull.push_back(order[i]);
    hull.push_back(order[k]);
  } else {
    hull.push_back(order[0]);
    hull.push_back(order[k]);
    for (std::size_t i = k - 1; i >= 1; --i) hull.push_back(order[i]);
  }

  std::vector<char> visible;
  for (std::size_t n = k + 1; n < order.size(); ++n) {
    const std::size_t q = order[n];
    const std::size_t h = hull.size();
    visible.assign(h, 0);
    for (std::size_t i = 0; i < h; ++i) {
      visible[i] = orient(pts[hull[i]], pts[hull[(i + 1) % h]], pts[q]) < 0;
    }
    std::size_t start = h;
    for (std::size_t i = 0; i < h; ++i) {
      if (visible[i] && !visible[(i + h - 1) % h]) {
        start = i;
        break;
      }
    }
    if (start == h) throw Error("triangulation sweep: new point sees no hull edge");

    std::size_t i = start;
    std::size_t count = 0;
    while (visible[i]) {
      mesh.add(hull[(i + 1) % h], hull[i], q);
      i = (i + 1) % h;
      ++count;
    }
    // Hull vertices strictly inside the visible chain are now interior.
    std::vector<std::size_t> next;
    next.reserve(h + 1);
    const std::size_t last = (start + count) % h;
    for (std::size_t j = last;; j = (j + 1) % h) {
      next.push_back(hull[j]);
      if (j == start) break;
    }
    next.push_back(q);
    hull = std::move(next);
  }
}

// Flips every non-locally-Delaunay, unconstrained edge until none remain.
void lawson(Mesh& mesh, const std::unordered_set<std::uint64_t>& constrained,
            std::vector<IndexEdge> stack) {
  while (!stack.empty()) {
    const auto [a, b] = stack.back();
    stack.pop_back();
    if (constrained.contains(undirected_key(a, b)) || !mesh.interior(a, b)) continue;
    const std::size_t c = *mesh.apex(a, b);
    const std::size_t d = *mesh.apex(b, a);
    if (incircle(mesh.pt(a), mesh.pt(b), mesh.pt(c), mesh.pt(d)) <= 0) continue;
    mesh.flip(a, b, c, d);
    stack.push_back({a, d});
    stack.push_back({d, b});
    stack.push_back({b, c});
    stack.push_back({c, a});
  }
}

std::vector<IndexEdge> all_edges(const Mesh& mesh) {
  std::vector<IndexEdge> edges;
  for (const TriangleIndices& t : mesh.triangles()) {
    for (int i = 0; i < 3; ++i) {
      const std::size_t a = t[i], b = t[(i + 1) % 3];
      if (a < b || !mesh.interior(a, b)) edges.push_back({a, b});
    }
  }
  // Pop order follows triangle order.
  std::reverse(edges.begin(), edges.end());
  return edges;
}

[[noreturn]] void bad_constraint(const IndexEdge& e, const std::string& why) {
  throw MappingError(MappingErrorKind::InvalidConstraint,
                     "constraint edge (" + std::to_string(e.first) + ", " + std::to_string(e.second) +
                         "): " + why,
                     {e.first, e.second});
}

// Forces u-v into the mesh by flipping the edges it crosses.
void insert_constraint(Mesh& mesh, std::span<const Point2> pts, const IndexEdge& e,
                       const std::unordered_set<std::uint64_t>& constrained) {
  const auto [u, v] = e;
  if (mesh.has_edge(u, v)) return;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i != u && i != v && predicates::on_segment(pts[i], pts[u], pts[v])) {
      bad_constraint(e, "passes through vertex " + std::to_string(i));
    }
  }
  std::deque<IndexEdge> crossing;
  for (const TriangleIndices& t : mesh.triangles()) {
    for (int i = 0; i < 3; ++i) {
      const std::size_t a = t[i], b = t[(i + 1) % 3];
      if (a > b && mesh.interior(a, b)) continue;
      if (predicates::segments_cross_properly(pts[u], pts[v], pts[a], pts[b])) {
        if (constrained.contains(undirected_key(a, b))) bad_constraint(e, "crosses another constraint");
        crossing.push_back({a, b});
      }
    }
  }
  std::size_t stalled = 0;
  while (!crossing.empty()) {
    const auto [a, b] = crossing.front();
    crossing.pop_front();
    const std::size_t c = *mesh.apex(a, b);
    const std::size_t d = *mesh.apex(b, a);
    if (!predicates::segments_cross_properly(pts[a], pts[b], pts[c], pts[d])) {
      // Non-convex quad; revisit after its neighbours have moved.
      crossing.push_back({a, b});
      if (++stalled > 4 * crossing.size() + 16) throw Error("constraint insertion did not converge");
      continue;
    }
    stalled = 0;
    mesh.flip(a, b, c, d);
    if (predicates::segments_cross_properly(pts[u], pts[v], pts[c], pts[d])) {
      crossing.push_back({c, d});
    }
  }
}

}  // namespace

std::vector<TriangleIndices> triangulate(std::span<const Point2> points,
                                         std::span<const IndexEdge> constraints) {
  if (points.size() < 3) {
    throw MappingError(MappingErrorKind::TooFewPairs, "need at least 3 points, got " +
                                                          std::to_string(points.size()));
  }
  for (const Point2& p : points) {
    if (!p.finite()) throw GeometryError("triangulate: non-finite point");
  }

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (points[order[i]] == points[order[i - 1]]) {
      const std::size_t a = std::min(order[i], order[i - 1]);
      const std::size_t b = std::max(order[i], order[i - 1]);
      throw MappingError(MappingErrorKind::DuplicatePoint,
                         "points " + std::to_string(a) + " and " + std::to_string(b) + " coincide",
                         {a, b});
    }
  }

  Mesh mesh(points);
  sweep(mesh, points, order);
  std::unordered_set<std::uint64_t> constrained;
  lawson(mesh, constrained, all_edges(mesh));

  for (const IndexEdge& e : constraints) {
    if (e.first >= points.size() || e.second >= points.size() || e.first == e.second) {
      bad_constraint(e, "invalid vertex index");
    }
  }
  if (!constraints.empty()) {
    for (const IndexEdge& e : constraints) {
      insert_constraint(mesh, points, e, constrained);
      constrained.insert(undirected_key(e.first, e.second));
    }
    lawson(mesh, constrained, all_edges(mesh));
  }
  return mesh.triangles();
}

}  // namespace planwarp
