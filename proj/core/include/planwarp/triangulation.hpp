#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "planwarp/geometry.hpp"

namespace planwarp {

using TriangleIndices = std::array<std::size_t, 3>;
using IndexEdge = std::pair<std::size_t, std::size_t>;

/// Constrained Delaunay triangulation of `points` covering their convex hull.
///
/// Every returned triangle is counter-clockwise and non-degenerate, and each
/// constraint edge appears as a triangle edge. Ties between co-circular
/// configurations are broken deterministically by input order, so identical
/// inputs always give identical output.
///
/// Throws MappingError: TooFewPairs (< 3 points), DuplicatePoint, Collinear,
/// InvalidConstraint (out-of-range index, a vertex on the open constraint
/// segment, or two constraints crossing).
std::vector<TriangleIndices> triangulate(std::span<const Point2> points,
                                         std::span<const IndexEdge> constraints = {});

}  // namespace planwarp
