#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace planwarp {

/// Inside-triangle tolerance on barycentric weights.
inline constexpr double kInsideTolerance = 1e-9;
/// Relative signed-area threshold below which a triangle is degenerate.
inline constexpr double kDegenerateTolerance = 1e-12;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
  friend auto operator<=>(const Point2&, const Point2&) = default;

  Point2& operator+=(Point2 o) { x += o.x; y += o.y; return *this; }
  Point2& operator-=(Point2 o) { x -= o.x; y -= o.y; return *this; }
  friend Point2 operator+(Point2 a, Point2 b) { return a += b; }
  friend Point2 operator-(Point2 a, Point2 b) { return a -= b; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend Point2 operator*(Point2 p, double s) { return s * p; }

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
inline Point2 lerp(Point2 a, Point2 b, double t) { return a + t * (b - a); }

/// Euclidean distance from `p` to the closed segment [a, b].
double distance_to_segment(Point2 p, Point2 a, Point2 b);

struct Triangle {
  Point2 v0, v1, v2;

  /// Positive for counter-clockwise vertex order.
  double signed_area() const { return 0.5 * cross(v1 - v0, v2 - v0); }
  /// Squared diagonal of the axis-aligned bounding box.
  double bbox_diagonal_sq() const;
  bool degenerate() const;
  const Point2& operator[](std::size_t i) const { return i == 0 ? v0 : (i == 1 ? v1 : v2); }
};

struct Barycentric {
  double l0 = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;

  double sum() const { return l0 + l1 + l2; }
  double min() const { return std::fmin(l0, std::fmin(l1, l2)); }
  bool inside(double tol = kInsideTolerance) const { return min() >= -tol; }
};

/// Throws GeometryError for a degenerate triangle.
Barycentric barycentric(const Triangle& tri, Point2 p);
Point2 apply_barycentric(const Triangle& tri, const Barycentric& b);

/// Index of the lowest-numbered triangle containing `p` (boundary inclusive),
/// or nullopt when no triangle contains it.
std::optional<std::size_t> locate(std::span<const Triangle> tris, Point2 p);

/// Open polyline with at least two vertices and no zero-length segment.
class Polyline {
 public:
  /// Throws GeometryError when the invariants do not hold.
  explicit Polyline(std::vector<Point2> vertices);

  const std::vector<Point2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Point2& front() const { return vertices_.front(); }
  const Point2& back() const { return vertices_.back(); }

  double length() const { return cumulative_.back(); }
  /// Arc length from the first vertex to vertex `i`.
  double arc_length_at(std::size_t i) const { return cumulative_[i]; }
  /// Arc-length fraction of vertex `i`; exactly 0 and 1 at the ends.
  double fraction_at(std::size_t i) const;
  /// Point at arc-length fraction `f` (clamped to [0, 1]).
  Point2 point_at(double f) const;

  friend bool operator==(const Polyline& a, const Polyline& b) {
    return a.vertices_ == b.vertices_;
  }

 private:
  std::vector<Point2> vertices_;
  std::vector<double> cumulative_;
};

/// `n` points at evenly spaced arc-length fractions 0, 1/(n-1), ..., 1.
std::vector<Point2> resample_by_arclength(const Polyline& pl, std::size_t n);

/// True when the closed ring has no repeated vertices, no zero-length edge
/// and no two edges meeting anywhere except shared endpoints of neighbours.
bool is_simple_polygon(std::span<const Point2> ring);

/// Even-odd point-in-polygon test; points on the boundary are outside.
bool strictly_inside_polygon(std::span<const Point2> ring, Point2 p);

}  // namespace planwarp
