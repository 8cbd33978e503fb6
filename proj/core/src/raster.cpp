#include "planwarp/raster.hpp"

#include <algorithm>
#include <cmath>

#include "planwarp/errors.hpp"
#include "planwarp/predicates.hpp"

namespace planwarp {
namespace {

int clamp_index(double v, int lo, int hi) {
  if (!(v > lo)) return lo;
  if (!(v < hi)) return hi;
  return static_cast<int>(v);
}

// Number of columns whose center on row `row` lies strictly left of the
// upward edge lo->hi, plus whether the first column not counted sits exactly
// on the edge. Centers along a row are monotone in x, so the counted columns
// form a prefix.
struct EdgeSplit {
  int left_count;
  bool boundary_hit;
};

EdgeSplit split_row(Point2 lo, Point2 hi, int row, const GridFrame& f) {
  const double y = f.cell_center(0, row).y;
  const double x_cross = lo.x + (y - lo.y) * (hi.x - lo.x) / (hi.y - lo.y);
  // Estimate: columns with center x < x_cross.
  int k = clamp_index(std::ceil((x_cross - f.origin.x) / f.resolution - 0.5), 0, f.width);
  auto left = [&](int col) { return predicates::orient(lo, hi, f.cell_center(col, row)) > 0; };
  while (k > 0 && !left(k - 1)) --k;
  while (k < f.width && left(k)) ++k;
  const bool hit = k < f.width && predicates::orient(lo, hi, f.cell_center(k, row)) == 0;
  return {k, hit};
}

}  // namespace

std::vector<std::size_t> rasterize_polygon(std::span<const Point2> ring, const GridFrame& f) {
  if (ring.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
  if (!is_simple_polygon(ring)) throw GeometryError("polygon is not simple");

  std::vector<std::size_t> out;
  if (f.width == 0 || f.height == 0) return out;

  double ymin = ring[0].y, ymax = ring[0].y;
  for (const Point2& p : ring) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int row_lo = clamp_index(std::floor((ymin - f.origin.y) / f.resolution - 0.5) - 1, 0, f.height);
  const int row_hi = clamp_index(std::ceil((ymax - f.origin.y) / f.resolution - 0.5) + 1, 0, f.height);

  const std::size_t n = ring.size();
  std::vector<int> splits;
  std::vector<char> boundary(static_cast<std::size_t>(f.width));
  for (int row = row_lo; row < row_hi; ++row) {
    const double y = f.cell_center(0, row).y;
    if (!(y > ymin && y < ymax)) continue;
    splits.clear();
    std::fill(boundary.begin(), boundary.end(), 0);

    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = ring[i], b = ring[(i + 1) % n];
      if (a.y == y && b.y == y) {
        // Horizontal edge on the center line: every center on it is boundary.
        const double x0 = std::min(a.x, b.x), x1 = std::max(a.x, b.x);
        int c = clamp_index(std::floor((x0 - f.origin.x) / f.resolution - 1.5), 0, f.width);
        for (; c < f.width && f.cell_center(c, row).x <= x1; ++c) {
          if (f.cell_center(c, row).x >= x0) boundary[c] = 1;
        }
        continue;
      }
      if (a.y == y) {
        // Vertex on the center line; it is the boundary if it is a center.
        const int c = clamp_index(std::round((a.x - f.origin.x) / f.resolution - 0.5), 0, f.width - 1);
        for (int cc = std::max(0, c - 1); cc <= std::min(f.width - 1, c + 1); ++cc) {
          if (f.cell_center(cc, row).x == a.x) boundary[cc] = 1;
        }
      }
      if ((a.y > y) != (b.y > y)) {
        const EdgeSplit s = b.y > a.y ? split_row(a, b, row, f) : split_row(b, a, row, f);
        splits.push_back(s.left_count);
        if (s.boundary_hit) boundary[s.left_count] = 1;
      }
    }
    if (splits.empty()) continue;

    // Column c is inside iff an odd number of crossings lie to its right,
    // i.e. an odd number of splits exceed c.
    std::sort(splits.begin(), splits.end());
    const std::size_t m = splits.size();
    for (std::size_t j = 0; j < m; ++j) {
      // Columns in [splits[j-1], splits[j]) have m - j splits to the right.
      if ((m - j) % 2 == 0) continue;
      const int from = j == 0 ? 0 : splits[j - 1];
      for (int c = from; c < splits[j]; ++c) {
        if (!boundary[c]) out.push_back(f.index(c, row));
      }
    }
  }
  return out;
}

std::vector<std::size_t> supercover_segment(Point2 a, Point2 b, const GridFrame& f) {
  std::vector<std::size_t> out;
  if (f.width == 0 || f.height == 0) return out;
  const Point2 lo_pt = a.x <= b.x ? a : b;
  const Point2 hi_pt = a.x <= b.x ? b : a;

  const auto col_of = [&](double x) { return std::floor((x - f.origin.x) / f.resolution); };
  const auto row_of = [&](double y) { return std::floor((y - f.origin.y) / f.resolution); };
  const int col_lo = clamp_index(col_of(lo_pt.x) - 1, 0, f.width);
  const int col_hi = clamp_index(col_of(hi_pt.x) + 2, 0, f.width);
  const double dx = hi_pt.x - lo_pt.x;

  for (int col = col_lo; col < col_hi; ++col) {
    // y-extent of the segment over this column's closed x-interval.
    const double x0 = std::max(f.col_edge(col), lo_pt.x);
    const double x1 = std::min(f.col_edge(col + 1), hi_pt.x);
    double y0 = std::min(a.y, b.y), y1 = std::max(a.y, b.y);
    if (dx > 0.0 && x0 <= x1) {
      const double slope = (hi_pt.y - lo_pt.y) / dx;
      const double ya = lo_pt.y + (x0 - lo_pt.x) * slope;
      const double yb = lo_pt.y + (x1 - lo_pt.x) * slope;
      y0 = std::min(ya, yb);
      y1 = std::max(ya, yb);
    }
    const int row_lo = clamp_index(row_of(y0) - 1, 0, f.height);
    const int row_hi = clamp_index(row_of(y1) + 2, 0, f.height);
    for (int row = row_lo; row < row_hi; ++row) {
      if (predicates::segment_meets_box(a, b, f.cell_min(col, row), f.cell_max(col, row))) {
        out.push_back(f.index(col, row));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> supercover_ring(std::span<const Point2> ring, const GridFrame& f) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto cells = supercover_segment(ring[i], ring[(i + 1) % ring.size()], f);
    out.insert(out.end(), cells.begin(), cells.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace planwarp
