#include "planwarp/geometry.hpp"

#include <algorithm>
#include <string>

#include "planwarp/errors.hpp"
#include "planwarp/predicates.hpp"

namespace planwarp {

double distance_to_segment(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len_sq = dot(ab, ab);
  if (len_sq == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0);
  return distance(p, lerp(a, b, t));
}

double Triangle::bbox_diagonal_sq() const {
  const double w = std::max({v0.x, v1.x, v2.x}) - std::min({v0.x, v1.x, v2.x});
  const double h = std::max({v0.y, v1.y, v2.y}) - std::min({v0.y, v1.y, v2.y});
  return w * w + h * h;
}

bool Triangle::degenerate() const {
  const double diag_sq = bbox_diagonal_sq();
  return diag_sq == 0.0 || std::fabs(signed_area()) < kDegenerateTolerance * diag_sq;
}

namespace {

// Barycentric weights without the degeneracy check; callers guarantee a
// non-zero denominator.
Barycentric weights(const Triangle& tri, Point2 p) {
  const Point2 e1 = tri.v1 - tri.v0;
  const Point2 e2 = tri.v2 - tri.v0;
  const Point2 d = p - tri.v0;
  const double den = cross(e1, e2);
  const double l1 = cross(d, e2) / den;
  const double l2 = cross(e1, d) / den;
  return {1.0 - l1 - l2, l1, l2};
}

}  // namespace

Barycentric barycentric(const Triangle& tri, Point2 p) {
  if (tri.degenerate()) throw GeometryError("barycentric: degenerate triangle");
  return weights(tri, p);
}

Point2 apply_barycentric(const Triangle& tri, const Barycentric& b) {
  return {b.l0 * tri.v0.x + b.l1 * tri.v1.x + b.l2 * tri.v2.x,
          b.l0 * tri.v0.y + b.l1 * tri.v1.y + b.l2 * tri.v2.y};
}

std::optional<std::size_t> locate(std::span<const Triangle> tris, Point2 p) {
  for (std::size_t i = 0; i < tris.size(); ++i) {
    const Triangle& t = tris[i];
    // Cheap reject with a margin well above the weight tolerance.
    const double pad = 1e-6 * std::sqrt(t.bbox_diagonal_sq());
    if (p.x < std::min({t.v0.x, t.v1.x, t.v2.x}) - pad ||
        p.x > std::max({t.v0.x, t.v1.x, t.v2.x}) + pad ||
        p.y < std::min({t.v0.y, t.v1.y, t.v2.y}) - pad ||
        p.y > std::max({t.v0.y, t.v1.y, t.v2.y}) + pad) {
      continue;
    }
    if (t.degenerate()) continue;
    if (weights(t, p).inside()) return i;
  }
  return std::nullopt;
}

Polyline::Polyline(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) throw GeometryError("polyline needs at least 2 vertices");
  cumulative_.reserve(vertices_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < vertices_.size(); ++i) {
    if (!vertices_[i].finite()) throw GeometryError("polyline vertex is not finite");
    if (vertices_[i] == vertices_[i - 1]) {
      throw GeometryError("polyline has a zero-length segment at vertex " + std::to_string(i));
    }
    cumulative_.push_back(cumulative_.back() + distance(vertices_[i - 1], vertices_[i]));
  }
  if (!vertices_.front().finite()) throw GeometryError("polyline vertex is not finite");
}

double Polyline::fraction_at(std::size_t i) const {
  if (i == 0) return 0.0;
  if (i + 1 == vertices_.size()) return 1.0;
  return cumulative_[i] / length();
}

Point2 Polyline::point_at(double f) const {
  if (f <= 0.0) return vertices_.front();
  if (f >= 1.0) return vertices_.back();
  const double target = f * length();
  // First cumulative value strictly greater than target bounds the segment.
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const std::size_t hi = std::min<std::size_t>(it - cumulative_.begin(), vertices_.size() - 1);
  const std::size_t lo = hi - 1;
  const double t = (target - cumulative_[lo]) / (cumulative_[hi] - cumulative_[lo]);
  return lerp(vertices_[lo], vertices_[hi], t);
}

std::vector<Point2> resample_by_arclength(const Polyline& pl, std::size_t n) {
  if (n < 2) throw GeometryError("resample_by_arclength needs n >= 2");
  std::vector<Point2> out;
  out.reserve(n);
  out.push_back(pl.front());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out.push_back(pl.point_at(static_cast<double>(i) / static_cast<double>(n - 1)));
  }
  out.push_back(pl.back());
  return out;
}

bool is_simple_polygon(std::span<const Point2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ring[i].finite() || ring[i] == ring[(i + 1) % n]) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = ring[i], b = ring[(i + 1) % n], c = ring[(i + 2) % n];
    // Neighbouring edges may only share their common vertex.
    if (predicates::on_segment(a, b, c) || predicates::on_segment(c, a, b)) return false;
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (predicates::segments_intersect(a, b, ring[j], ring[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool strictly_inside_polygon(std::span<const Point2> ring, Point2 p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = ring[i], b = ring[(i + 1) % n];
    if (predicates::on_segment(p, a, b)) return false;
    if ((a.y > p.y) != (b.y > p.y)) {
      const bool up = b.y > a.y;
      const int side = up ? predicates::orient(a, b, p) : predicates::orient(b, a, p);
      if (side > 0) inside = !inside;
    }
  }
  return inside;
}

}  // namespace planwarp
