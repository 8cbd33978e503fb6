#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "planwarp/geometry.hpp"
#include "planwarp/occupancy_grid.hpp"

namespace planwarp {

/// Row-major indices (row 0 = bottom) of the cells whose center lies
/// strictly inside the simple polygon `ring` (world meters, even-odd rule).
/// Centers on the boundary are excluded. Result is sorted ascending.
/// Throws GeometryError for fewer than 3 vertices or a self-intersecting ring.
std::vector<std::size_t> rasterize_polygon(std::span<const Point2> ring, const GridFrame& frame);

/// Supercover of a segment: every cell whose closed square meets [a, b].
/// Sorted ascending.
std::vector<std::size_t> supercover_segment(Point2 a, Point2 b, const GridFrame& frame);

/// Union of the supercovers of every edge of the closed ring. Sorted.
std::vector<std::size_t> supercover_ring(std::span<const Point2> ring, const GridFrame& frame);

}  // namespace planwarp
