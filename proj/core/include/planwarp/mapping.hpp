#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "planwarp/geometry.hpp"
#include "planwarp/triangulation.hpp"
#include "planwarp/types.hpp"

namespace planwarp {

/// Clicked plan/grid point pairs plus optional plan-side edges that must
/// survive triangulation.
struct CorrespondenceSet {
  std::vector<CorrespondencePair> pairs;
  std::vector<IndexEdge> constraint_edges;

  std::vector<Point2> plan_points() const;
  std::vector<Point2> grid_points() const;
};

enum class Direction { Forward, Inverse };

/// Expected orientation relation between plan and grid triangles.
/// Plan images are usually y-down while grids are y-up, so a correct map
/// may reverse orientation. Auto takes the sign of the total grid-side
/// signed area; every triangle must then agree with it.
enum class Handedness { Auto, Preserve, Mirror };

/// 2x2 matrix [[xx, xy], [yx, yy]] acting on column vectors.
struct Linear2 {
  double xx = 1.0, xy = 0.0, yx = 0.0, yy = 1.0;

  Point2 operator()(Point2 v) const { return {xx * v.x + xy * v.y, yx * v.x + yy * v.y}; }
  double det() const { return xx * yy - xy * yx; }
};

/// Bijection between the plan's convex hull and its image in the grid frame,
/// affine on each triangle of a shared triangulation.
class PiecewiseAffineMap {
 public:
  /// Delaunay-triangulates the plan points (honouring constraint edges),
  /// copies the topology to the grid points and rejects fold-over.
  /// Throws MappingError.
  static PiecewiseAffineMap build(const CorrespondenceSet& cs, Handedness handedness = Handedness::Auto);

  /// Re-validates a stored map. Throws MappingError (fold-over, degenerate
  /// or inconsistent topology) or FormatError (bad indices).
  static PiecewiseAffineMap from_parts(std::vector<Point2> plan, std::vector<Point2> grid,
                                       std::vector<TriangleIndices> triangles,
                                       Handedness handedness = Handedness::Auto);

  std::optional<Point2> forward(Point2 plan_point) const;
  std::optional<Point2> inverse(Point2 grid_point) const;
  std::optional<Point2> map(Point2 p, Direction dir) const {
    return dir == Direction::Forward ? forward(p) : inverse(p);
  }

  /// Triangle containing `p` in the source frame of `dir`.
  std::optional<std::size_t> locate(Point2 p, Direction dir) const;
  /// Linear part of the affine map on triangle `tri` in direction `dir`.
  Linear2 linear_part(std::size_t tri, Direction dir) const;

  std::span<const Point2> plan_points() const { return plan_; }
  std::span<const Point2> grid_points() const { return grid_; }
  std::span<const TriangleIndices> triangles() const { return tris_; }
  std::span<const Triangle> plan_triangles() const { return plan_tris_; }
  std::span<const Triangle> grid_triangles() const { return grid_tris_; }
  std::span<const Triangle> source_triangles(Direction dir) const {
    return dir == Direction::Forward ? plan_tris_ : grid_tris_;
  }
  std::span<const Triangle> target_triangles(Direction dir) const {
    return dir == Direction::Forward ? grid_tris_ : plan_tris_;
  }
  /// True when grid triangles have the opposite orientation to plan ones.
  bool mirrored() const { return mirrored_; }
  /// Unique undirected triangulation edges.
  std::span<const IndexEdge> edges() const { return edges_; }

 private:
  PiecewiseAffineMap(std::vector<Point2> plan, std::vector<Point2> grid,
                     std::vector<TriangleIndices> triangles, Handedness handedness);

  std::vector<Point2> plan_;
  std::vector<Point2> grid_;
  std::vector<TriangleIndices> tris_;
  std::vector<Triangle> plan_tris_;
  std::vector<Triangle> grid_tris_;
  std::vector<IndexEdge> edges_;
  bool mirrored_ = false;
};

/// Maps a polyline vertex by vertex, inserting bend points where a segment
/// crosses a triangle edge and refining by midpoint insertion until each
/// source midpoint's image lies within `max_err` of the image segment.
/// Throws OutsideError when any part of the polyline leaves the map.
Polyline map_polyline(const PiecewiseAffineMap& m, const Polyline& pl, double max_err, Direction dir);
inline Polyline forward_polyline(const PiecewiseAffineMap& m, const Polyline& pl, double max_err) {
  return map_polyline(m, pl, max_err, Direction::Forward);
}
inline Polyline inverse_polyline(const PiecewiseAffineMap& m, const Polyline& pl, double max_err) {
  return map_polyline(m, pl, max_err, Direction::Inverse);
}

/// Closed-ring variant of map_polyline; the closing edge is refined too and
/// the first vertex is not repeated at the end.
std::vector<Point2> map_ring(const PiecewiseAffineMap& m, std::span<const Point2> ring, double max_err,
                             Direction dir);

/// Two drawn curves (one per frame) to be matched by arc length.
struct CurvePair {
  Polyline curve_plan;
  Polyline curve_grid;
  double tolerance = 0.0;
};

struct CurveMatch {
  /// Shared arc-length fractions, strictly increasing from 0 to 1.
  std::vector<double> fractions;
  std::vector<CorrespondencePair> pairs;
};

/// Adaptive arc-length matching: starting from the endpoints, the worst
/// vertex deviation of either curve from its chord polyline is added to the
/// shared fraction set until both curves are within tolerance.
/// Throws GeometryError for a non-positive tolerance.
CurveMatch correspond_curves(const CurvePair& cp);

/// Largest distance from a curve vertex to the chord polyline through the
/// curve evaluated at `fractions`, measured per fraction interval.
double chord_deviation(const Polyline& curve, std::span<const double> fractions);

std::string serialize_mapping(const PiecewiseAffineMap& m);
PiecewiseAffineMap parse_mapping(std::string_view json);

}  // namespace planwarp
