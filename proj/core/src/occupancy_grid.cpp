#include "planwarp/occupancy_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "planwarp/errors.hpp"

namespace planwarp {

const char* to_string(CellState s) {
  switch (s) {
    case CellState::Free: return "free";
    case CellState::Occupied: return "occupied";
    case CellState::Unknown: return "unknown";
  }
  return "?";
}

namespace {

void validate(const GridFrame& frame, const GridThresholds& th) {
  if (frame.width < 0 || frame.height < 0) throw FormatError("grid dimensions must be non-negative");
  if (!(frame.resolution > 0.0) || !std::isfinite(frame.resolution)) {
    throw FormatError("grid resolution must be positive");
  }
  if (!frame.origin.finite()) throw FormatError("grid origin must be finite");
  if (!(0.0 <= th.free && th.free < th.occupied && th.occupied <= 1.0)) {
    throw FormatError("thresholds must satisfy 0 <= free_thresh < occupied_thresh <= 1 (got free=" +
                      std::to_string(th.free) + ", occupied=" + std::to_string(th.occupied) + ")");
  }
}

}  // namespace

OccupancyGrid::OccupancyGrid(GridFrame frame, GridThresholds thresholds, std::vector<CellState> cells)
    : frame_(frame), thresholds_(thresholds), cells_(std::move(cells)) {
  validate(frame_, thresholds_);
  if (cells_.size() != frame_.cell_count()) {
    throw FormatError("cell count " + std::to_string(cells_.size()) + " does not match " +
                      std::to_string(frame_.width) + "x" + std::to_string(frame_.height));
  }
}

OccupancyGrid::OccupancyGrid(GridFrame frame, GridThresholds thresholds, CellState fill)
    : frame_(frame), thresholds_(thresholds) {
  validate(frame_, thresholds_);
  cells_.assign(frame_.cell_count(), fill);
}

std::size_t OccupancyGrid::count(CellState s) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s));
}

}  // namespace planwarp
