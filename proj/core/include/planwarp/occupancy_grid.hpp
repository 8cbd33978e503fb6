#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "planwarp/geometry.hpp"

namespace planwarp {

enum class CellState : std::uint8_t { Free, Occupied, Unknown };

const char* to_string(CellState s);

/// Metric placement of a grid: cell (col, row) covers the closed square
/// [ox + col*res, ox + (col+1)*res] x [oy + row*res, oy + (row+1)*res].
/// Row 0 is the bottom row (smallest world y).
struct GridFrame {
  int width = 0;
  int height = 0;
  double resolution = 1.0;
  Point2 origin;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(col);
  }
  int col_of(std::size_t index) const { return static_cast<int>(index % width); }
  int row_of(std::size_t index) const { return static_cast<int>(index / width); }

  double col_edge(int col) const { return origin.x + col * resolution; }
  double row_edge(int row) const { return origin.y + row * resolution; }
  Point2 cell_center(int col, int row) const {
    return {origin.x + (col + 0.5) * resolution, origin.y + (row + 0.5) * resolution};
  }
  Point2 cell_min(int col, int row) const { return {col_edge(col), row_edge(row)}; }
  Point2 cell_max(int col, int row) const { return {col_edge(col + 1), row_edge(row + 1)}; }

  friend bool operator==(const GridFrame&, const GridFrame&) = default;
};

struct GridThresholds {
  double occupied = 0.65;
  double free = 0.196;
  bool negate = false;

  friend bool operator==(const GridThresholds&, const GridThresholds&) = default;
};

/// SLAM occupancy grid with map_server style metadata.
class OccupancyGrid {
 public:
  /// Throws FormatError when cells.size() != width*height, resolution <= 0
  /// or the thresholds are out of order.
  OccupancyGrid(GridFrame frame, GridThresholds thresholds, std::vector<CellState> cells);
  /// Grid with every cell set to `fill`.
  OccupancyGrid(GridFrame frame, GridThresholds thresholds, CellState fill = CellState::Unknown);

  const GridFrame& frame() const { return frame_; }
  const GridThresholds& thresholds() const { return thresholds_; }
  int width() const { return frame_.width; }
  int height() const { return frame_.height; }
  double resolution() const { return frame_.resolution; }
  Point2 origin() const { return frame_.origin; }

  std::span<const CellState> cells() const { return cells_; }
  CellState at(int col, int row) const { return cells_[frame_.index(col, row)]; }
  CellState at(std::size_t index) const { return cells_[index]; }
  void set(int col, int row, CellState s) { cells_[frame_.index(col, row)] = s; }
  void set(std::size_t index, CellState s) { cells_[index] = s; }

  std::size_t count(CellState s) const;

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  GridFrame frame_;
  GridThresholds thresholds_;
  std::vector<CellState> cells_;
};

}  // namespace planwarp
