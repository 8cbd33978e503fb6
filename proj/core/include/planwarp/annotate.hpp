#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "planwarp/geometry.hpp"
#include "planwarp/mapping.hpp"
#include "planwarp/occupancy_grid.hpp"
#include "planwarp/types.hpp"

namespace planwarp {

enum class Frame { Plan, Grid };

struct Pose2D {
  Point2 position;
  double heading = 0.0;  // radians, (-pi, pi]
  Frame frame = Frame::Grid;

  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Wraps an angle into (-pi, pi].
double normalize_heading(double angle);

/// Carries a pose into the other frame: the position through forward or
/// inverse, the heading through the containing triangle's linear part.
/// Throws OutsideError when the position is not covered by the map.
Pose2D map_pose(const PiecewiseAffineMap& m, const Pose2D& pose);

/// Region outline carried into the grid frame (world meters), refined to a
/// quarter cell. Throws GeometryError for a non-simple region and
/// OutsideError when any part leaves the map.
std::vector<Point2> map_region(const PiecewiseAffineMap& m, const Region& r, double resolution);

/// Cells a no-go region turns into walls: centers strictly inside the mapped
/// outline plus the supercover of every mapped edge. Sorted, unique.
std::vector<std::size_t> region_cells(const PiecewiseAffineMap& m, const Region& r, const GridFrame& frame);

/// Copy of `grid` with every cell of region_cells() set to Occupied.
OccupancyGrid burn_region(const PiecewiseAffineMap& m, const Region& r, const OccupancyGrid& grid);
OccupancyGrid burn_regions(const PiecewiseAffineMap& m, std::span<const Region> regions,
                           const OccupancyGrid& grid);

}  // namespace planwarp
