#pragma once

#include <string>
#include <vector>

#include "planwarp/geometry.hpp"

namespace planwarp {

/// One user click pair: a floor-plan point (pixels) and the matching
/// occupancy-grid point (world meters).
struct CorrespondencePair {
  Point2 plan;
  Point2 grid;

  friend bool operator==(const CorrespondencePair&, const CorrespondencePair&) = default;
};

enum class RegionKind { NoGo };

/// Labeled polygon drawn on the floor plan (plan pixels).
struct Region {
  std::string label;
  std::vector<Point2> polygon;
  RegionKind kind = RegionKind::NoGo;

  friend bool operator==(const Region&, const Region&) = default;
};

}  // namespace planwarp
