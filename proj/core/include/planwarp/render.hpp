#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "planwarp/annotate.hpp"
#include "planwarp/map_io.hpp"
#include "planwarp/mapping.hpp"

namespace planwarp {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB raster, row 0 at the top.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h, Rgb fill);

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  void fill_rect(int x0, int y0, int x1, int y1, Rgb c);  // inclusive corners, clipped
  void draw_line(Point2 a, Point2 b, Rgb c);
  /// Fills pixels whose center is inside the polygon (pixel coordinates).
  void fill_polygon(std::span<const Point2> ring, Rgb c);

  friend bool operator==(const Image&, const Image&) = default;
};

inline constexpr Rgb kBackground{255, 255, 255};

/// Fill color for the i-th region: red, green, then a fixed cycle.
Rgb region_color(std::size_t i);

struct OverlayLayout {
  int plan_x = 0;       // left edge of the plan pane
  int grid_x = 0;       // left edge of the grid pane
  int grid_scale = 1;   // pixels per grid cell
  int width = 0;
  int height = 0;
};

OverlayLayout overlay_layout(const FloorPlan& plan, const OccupancyGrid& grid);

/// Side-by-side view: floor plan with regions, correspondence markers and the
/// mapped robot pose on the left; the grid with burned regions, markers and
/// the raw pose on the right. `pose` is in the grid frame.
Image render_overlay(const PiecewiseAffineMap& m, const FloorPlan& plan, const OccupancyGrid& grid,
                     std::span<const Region> regions, const std::optional<Pose2D>& pose = std::nullopt);

/// Deterministic PNG encoding (no timestamps or text chunks).
Bytes encode_png(const Image& img);

}  // namespace planwarp
