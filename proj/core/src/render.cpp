#include "planwarp/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>

#include "planwarp/errors.hpp"

namespace planwarp {

Image::Image(int w, int h, Rgb fill) : width(w), height(h) {
  rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = fill[0];
    rgb[i + 1] = fill[1];
    rgb[i + 2] = fill[2];
  }
}

Rgb Image::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
  if (!in_bounds(x, y)) return;
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[i] = c[0];
  rgb[i + 1] = c[1];
  rgb[i + 2] = c[2];
}

void Image::fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
  for (int y = std::max(0, y0); y <= std::min(height - 1, y1); ++y) {
    for (int x = std::max(0, x0); x <= std::min(width - 1, x1); ++x) set(x, y, c);
  }
}

void Image::draw_line(Point2 a, Point2 b, Rgb c) {
  // Bresenham on rounded endpoints.
  int x0 = static_cast<int>(std::lround(a.x)), y0 = static_cast<int>(std::lround(a.y));
  const int x1 = static_cast<int>(std::lround(b.x)), y1 = static_cast<int>(std::lround(b.y));
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    set(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; x0 += sx; }
    if (e2 <= dx) { err += dx; y0 += sy; }
  }
}

void Image::fill_polygon(std::span<const Point2> ring, Rgb c) {
  if (ring.size() < 3) return;
  double ymin = ring[0].y, ymax = ring[0].y;
  for (const Point2& p : ring) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  std::vector<double> xs;
  const int y_lo = std::max(0, static_cast<int>(std::floor(ymin)));
  const int y_hi = std::min(height - 1, static_cast<int>(std::ceil(ymax)));
  for (int y = y_lo; y <= y_hi; ++y) {
    const double cy = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Point2 a = ring[i], b = ring[(i + 1) % ring.size()];
      if ((a.y > cy) != (b.y > cy)) xs.push_back(a.x + (cy - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int x_from = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int x_to = std::min(width - 1, static_cast<int>(std::floor(xs[k + 1] - 0.5)));
      for (int x = x_from; x <= x_to; ++x) set(x, y, c);
    }
  }
}

Rgb region_color(std::size_t i) {
  static constexpr std::array<Rgb, 6> kPalette{{
      {220, 40, 40}, {40, 170, 60}, {230, 150, 20}, {150, 60, 200}, {20, 160, 200}, {200, 60, 140}}};
  return kPalette[i % kPalette.size()];
}

namespace {

constexpr int kGap = 8;
constexpr int kMaxGridScale = 16;
constexpr Rgb kStroke{30, 30, 30};
constexpr Rgb kPose{30, 80, 230};

Rgb marker_color(std::size_t i) {
  static constexpr std::array<Rgb, 8> kMarkers{{{230, 25, 75},  {60, 180, 75},  {255, 200, 25},
                                                {0, 130, 200},  {245, 130, 48}, {145, 30, 180},
                                                {70, 200, 200}, {240, 50, 230}}};
  return kMarkers[i % kMarkers.size()];
}

Rgb blend(Rgb base, Rgb over) {
  return {static_cast<std::uint8_t>((base[0] + 2 * over[0]) / 3),
          static_cast<std::uint8_t>((base[1] + 2 * over[1]) / 3),
          static_cast<std::uint8_t>((base[2] + 2 * over[2]) / 3)};
}

void draw_marker(Image& img, Point2 p, Rgb c, int half) {
  const int x = static_cast<int>(std::lround(p.x)), y = static_cast<int>(std::lround(p.y));
  img.fill_rect(x - half, y - half, x + half, y + half, c);
}

void draw_pose(Image& img, Point2 p, double screen_heading, int half) {
  draw_marker(img, p, kPose, half);
  const Point2 tip = p + (4.0 * half) * Point2{std::cos(screen_heading), std::sin(screen_heading)};
  img.draw_line(p, tip, kPose);
}

}  // namespace

OverlayLayout overlay_layout(const FloorPlan& plan, const OccupancyGrid& grid) {
  OverlayLayout l;
  l.plan_x = 0;
  l.grid_x = plan.width + kGap;
  if (grid.height() > 0) {
    l.grid_scale = static_cast<int>(std::lround(static_cast<double>(plan.height) / grid.height()));
  }
  l.grid_scale = std::clamp(l.grid_scale, 1, kMaxGridScale);
  l.width = l.grid_x + grid.width() * l.grid_scale;
  l.height = std::max(plan.height, grid.height() * l.grid_scale);
  return l;
}

Image render_overlay(const PiecewiseAffineMap& m, const FloorPlan& plan, const OccupancyGrid& grid,
                     std::span<const Region> regions, const std::optional<Pose2D>& pose) {
  const OverlayLayout l = overlay_layout(plan, grid);
  Image img(l.width, l.height, kBackground);
  const GridFrame& f = grid.frame();
  const auto to_grid_px = [&](Point2 w) {
    const double u = (w.x - f.origin.x) / f.resolution;
    const double v = (w.y - f.origin.y) / f.resolution;
    return Point2{l.grid_x + u * l.grid_scale, (f.height - v) * l.grid_scale};
  };

  // Grid pane: top image row is the highest grid row.
  for (int row = 0; row < f.height; ++row) {
    for (int col = 0; col < f.width; ++col) {
      const CellState s = grid.at(col, row);
      const std::uint8_t g = s == CellState::Occupied ? 0 : (s == CellState::Free ? 255 : 205);
      const int x0 = l.grid_x + col * l.grid_scale;
      const int y0 = (f.height - 1 - row) * l.grid_scale;
      img.fill_rect(x0, y0, x0 + l.grid_scale - 1, y0 + l.grid_scale - 1, {g, g, g});
    }
  }

  // Regions: fill on the plan, burned cells on the grid.
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Region& r = regions[i];
    img.fill_polygon(r.polygon, blend(kBackground, region_color(i)));
    std::vector<std::size_t> cells;
    try {
      cells = region_cells(m, r, f);
    } catch (const Error&) {
      continue;  // region not covered by the map; plan-side fill only
    }
    for (std::size_t idx : cells) {
      const int col = f.col_of(idx), row = f.row_of(idx);
      const int x0 = l.grid_x + col * l.grid_scale;
      const int y0 = (f.height - 1 - row) * l.grid_scale;
      img.fill_rect(x0, y0, x0 + l.grid_scale - 1, y0 + l.grid_scale - 1, region_color(i));
    }
  }

  for (const Polyline& s : plan.strokes) {
    const auto& v = s.vertices();
    for (std::size_t i = 1; i < v.size(); ++i) img.draw_line(v[i - 1], v[i], kStroke);
  }
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& poly = regions[i].polygon;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      img.draw_line(poly[k], poly[(k + 1) % poly.size()], region_color(i));
    }
  }

  // Correspondence markers, same color in both panes.
  const int half = std::max(2, l.grid_scale / 2);
  for (std::size_t i = 0; i < m.plan_points().size(); ++i) {
    draw_marker(img, m.plan_points()[i], marker_color(i), 2);
    draw_marker(img, to_grid_px(m.grid_points()[i]), marker_color(i), half);
  }

  if (pose) {
    // Screen y points down in both panes; grid world y points up.
    const Pose2D grid_pose = pose->frame == Frame::Grid ? *pose : map_pose(m, *pose);
    draw_pose(img, to_grid_px(grid_pose.position), -grid_pose.heading, half);
    try {
      const Pose2D on_plan = map_pose(m, grid_pose);
      draw_pose(img, on_plan.position, on_plan.heading, 3);
    } catch (const OutsideError&) {
    }
  }
  return img;
}

namespace {

void png_append(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush(png_structp) {}

}  // namespace

Bytes encode_png(const Image& img) {
  if (img.width <= 0 || img.height <= 0) throw Error("encode_png: empty image");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("encode_png: libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("encode_png: libpng init failed");
  }
  Bytes out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("encode_png: libpng write failed");
  }
  png_set_write_fn(png, &out, png_append, png_flush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace planwarp
