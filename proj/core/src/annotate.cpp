#include "planwarp/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "planwarp/errors.hpp"
#include "planwarp/raster.hpp"

namespace planwarp {

double normalize_heading(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::remainder(angle, two_pi);  // [-pi, pi]
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

Pose2D map_pose(const PiecewiseAffineMap& m, const Pose2D& pose) {
  const Direction dir = pose.frame == Frame::Grid ? Direction::Inverse : Direction::Forward;
  const auto tri = m.locate(pose.position, dir);
  if (!tri) throw OutsideError("pose position lies outside the mapped region");

  Pose2D out;
  out.frame = pose.frame == Frame::Grid ? Frame::Plan : Frame::Grid;
  out.position = *m.map(pose.position, dir);
  const Point2 v = m.linear_part(*tri, dir)({std::cos(pose.heading), std::sin(pose.heading)});
  out.heading = normalize_heading(std::atan2(v.y, v.x));
  return out;
}

std::vector<Point2> map_region(const PiecewiseAffineMap& m, const Region& r, double resolution) {
  if (r.polygon.size() < 3) throw GeometryError("region '" + r.label + "' needs at least 3 vertices");
  if (!is_simple_polygon(r.polygon)) throw GeometryError("region '" + r.label + "' is self-intersecting");
  return map_ring(m, r.polygon, resolution / 4.0, Direction::Forward);
}

std::vector<std::size_t> region_cells(const PiecewiseAffineMap& m, const Region& r, const GridFrame& frame) {
  const std::vector<Point2> outline = map_region(m, r, frame.resolution);
  std::vector<std::size_t> cells = rasterize_polygon(outline, frame);
  const std::vector<std::size_t> wall = supercover_ring(outline, frame);
  std::vector<std::size_t> out;
  out.reserve(cells.size() + wall.size());
  std::set_union(cells.begin(), cells.end(), wall.begin(), wall.end(), std::back_inserter(out));
  return out;
}

OccupancyGrid burn_region(const PiecewiseAffineMap& m, const Region& r, const OccupancyGrid& grid) {
  OccupancyGrid out = grid;
  for (std::size_t idx : region_cells(m, r, grid.frame())) out.set(idx, CellState::Occupied);
  return out;
}

OccupancyGrid burn_regions(const PiecewiseAffineMap& m, std::span<const Region> regions,
                           const OccupancyGrid& grid) {
  OccupancyGrid out = grid;
  for (const Region& r : regions) {
    for (std::size_t idx : region_cells(m, r, grid.frame())) out.set(idx, CellState::Occupied);
  }
  return out;
}

}  // namespace planwarp
