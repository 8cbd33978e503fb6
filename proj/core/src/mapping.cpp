#include "planwarp/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "planwarp/errors.hpp"
#include "planwarp/predicates.hpp"

namespace planwarp {

const char* to_string(MappingErrorKind kind) {
  switch (kind) {
    case MappingErrorKind::TooFewPairs: return "too_few_pairs";
    case MappingErrorKind::DuplicatePoint: return "duplicate_point";
    case MappingErrorKind::Collinear: return "collinear";
    case MappingErrorKind::FoldOver: return "fold_over";
    case MappingErrorKind::InvalidConstraint: return "invalid_constraint";
  }
  return "unknown";
}

std::vector<Point2> CorrespondenceSet::plan_points() const {
  std::vector<Point2> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.plan);
  return out;
}

std::vector<Point2> CorrespondenceSet::grid_points() const {
  std::vector<Point2> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.grid);
  return out;
}

namespace {

std::string triangle_name(const TriangleIndices& t) {
  return "(" + std::to_string(t[0]) + ", " + std::to_string(t[1]) + ", " + std::to_string(t[2]) + ")";
}

void check_duplicates(std::span<const Point2> pts, const char* frame) {
  std::map<Point2, std::size_t> seen;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [it, inserted] = seen.emplace(pts[i], i);
    if (!inserted) {
      throw MappingError(MappingErrorKind::DuplicatePoint,
                         std::string(frame) + " points " + std::to_string(it->second) + " and " +
                             std::to_string(i) + " coincide",
                         {it->second, i});
    }
  }
}

}  // namespace

PiecewiseAffineMap::PiecewiseAffineMap(std::vector<Point2> plan, std::vector<Point2> grid,
                                       std::vector<TriangleIndices> triangles, Handedness handedness)
    : plan_(std::move(plan)), grid_(std::move(grid)), tris_(std::move(triangles)) {
  plan_tris_.reserve(tris_.size());
  grid_tris_.reserve(tris_.size());
  std::set<IndexEdge> edges;
  double grid_area = 0.0;
  for (const TriangleIndices& t : tris_) {
    plan_tris_.push_back({plan_[t[0]], plan_[t[1]], plan_[t[2]]});
    grid_tris_.push_back({grid_[t[0]], grid_[t[1]], grid_[t[2]]});
    grid_area += grid_tris_.back().signed_area();
    for (int i = 0; i < 3; ++i) {
      const std::size_t a = t[i], b = t[(i + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  edges_.assign(edges.begin(), edges.end());
  mirrored_ = handedness == Handedness::Mirror || (handedness == Handedness::Auto && grid_area < 0.0);
  const int expected = mirrored_ ? -1 : 1;

  for (std::size_t i = 0; i < tris_.size(); ++i) {
    const Triangle& p = plan_tris_[i];
    const Triangle& g = grid_tris_[i];
    if (p.degenerate() || predicates::orient(p.v0, p.v1, p.v2) <= 0) {
      throw MappingError(MappingErrorKind::Collinear,
                         "plan triangle " + triangle_name(tris_[i]) + " is degenerate",
                         {tris_[i].begin(), tris_[i].end()});
    }
    const int o = predicates::orient(g.v0, g.v1, g.v2);
    if (g.degenerate() || o != expected) {
      throw MappingError(MappingErrorKind::FoldOver,
                         "fold-over: grid triangle " + triangle_name(tris_[i]) +
                             (o == -expected ? " flips orientation" : " is degenerate"),
                         {tris_[i].begin(), tris_[i].end()});
    }
  }
}

PiecewiseAffineMap PiecewiseAffineMap::build(const CorrespondenceSet& cs, Handedness handedness) {
  if (cs.pairs.size() < 3) {
    throw MappingError(MappingErrorKind::TooFewPairs,
                       "need at least 3 correspondences, got " + std::to_string(cs.pairs.size()));
  }
  std::vector<Point2> plan = cs.plan_points();
  std::vector<Point2> grid = cs.grid_points();
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (!plan[i].finite() || !grid[i].finite()) {
      throw GeometryError("correspondence " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
  check_duplicates(plan, "plan");
  check_duplicates(grid, "grid");
  std::vector<TriangleIndices> tris = triangulate(plan, cs.constraint_edges);
  return PiecewiseAffineMap(std::move(plan), std::move(grid), std::move(tris), handedness);
}

PiecewiseAffineMap PiecewiseAffineMap::from_parts(std::vector<Point2> plan, std::vector<Point2> grid,
                                                  std::vector<TriangleIndices> triangles,
                                                  Handedness handedness) {
  if (plan.size() != grid.size()) throw FormatError("mapping: plan and grid point counts differ");
  if (triangles.empty()) throw FormatError("mapping: no triangles");
  for (const auto& t : triangles) {
    for (std::size_t v : t) {
      if (v >= plan.size()) throw FormatError("mapping: triangle index out of range");
    }
  }
  check_duplicates(plan, "plan");
  check_duplicates(grid, "grid");
  // Each directed edge may belong to one triangle only, otherwise triangles
  // overlap or repeat.
  std::set<IndexEdge> directed;
  for (const auto& t : triangles) {
    for (int i = 0; i < 3; ++i) {
      if (!directed.insert({t[i], t[(i + 1) % 3]}).second) {
        throw FormatError("mapping: triangles " + triangle_name(t) + " overlap a neighbour");
      }
    }
  }
  return PiecewiseAffineMap(std::move(plan), std::move(grid), std::move(triangles), handedness);
}

std::optional<std::size_t> PiecewiseAffineMap::locate(Point2 p, Direction dir) const {
  return planwarp::locate(source_triangles(dir), p);
}

namespace {

std::optional<Point2> transport(std::span<const Triangle> from, std::span<const Triangle> to, Point2 p) {
  const auto idx = locate(from, p);
  if (!idx) return std::nullopt;
  // t0 + T adj(S) (p - s0) / det(S): exact for exactly representable affine data.
  const Triangle& s = from[*idx];
  const Triangle& t = to[*idx];
  const Point2 s1 = s.v1 - s.v0, s2 = s.v2 - s.v0, d = p - s.v0;
  const double det = cross(s1, s2);
  const double n1 = cross(d, s2), n2 = cross(s1, d);
  const Point2 t1 = t.v1 - t.v0, t2 = t.v2 - t.v0;
  return Point2{t.v0.x + (n1 * t1.x + n2 * t2.x) / det, t.v0.y + (n1 * t1.y + n2 * t2.y) / det};
}

}  // namespace

std::optional<Point2> PiecewiseAffineMap::forward(Point2 p) const {
  return transport(plan_tris_, grid_tris_, p);
}

std::optional<Point2> PiecewiseAffineMap::inverse(Point2 p) const {
  return transport(grid_tris_, plan_tris_, p);
}

Linear2 PiecewiseAffineMap::linear_part(std::size_t tri, Direction dir) const {
  const Triangle& s = source_triangles(dir)[tri];
  const Triangle& t = target_triangles(dir)[tri];
  // Columns: source edges S, target edges T; linear part = T * S^-1.
  const Point2 s1 = s.v1 - s.v0, s2 = s.v2 - s.v0;
  const Point2 t1 = t.v1 - t.v0, t2 = t.v2 - t.v0;
  const double det = cross(s1, s2);
  const Linear2 s_inv{s2.y / det, -s2.x / det, -s1.y / det, s1.x / det};
  return {t1.x * s_inv.xx + t2.x * s_inv.yx, t1.x * s_inv.xy + t2.x * s_inv.yy,
          t1.y * s_inv.xx + t2.y * s_inv.yx, t1.y * s_inv.xy + t2.y * s_inv.yy};
}

// ---------------------------------------------------------------- polylines

namespace {

constexpr int kMaxDepth = 12;

class SegmentMapper {
 public:
  SegmentMapper(const PiecewiseAffineMap& m, double max_err, Direction dir)
      : m_(m), max_err_(max_err), dir_(dir) {
    const auto pts = dir == Direction::Forward ? m.plan_points() : m.grid_points();
    src_pts_.assign(pts.begin(), pts.end());
  }

  Point2 map_vertex(Point2 p) const {
    const auto q = m_.map(p, dir_);
    if (!q) {
      throw OutsideError("polyline vertex (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                         ") lies outside the mapped region");
    }
    return *q;
  }

  // Appends the image of (a, b] to `out`; the image of `a` is already there.
  void append_segment(Point2 a, Point2 b, Point2 fb, std::vector<Point2>& out) const {
    std::vector<double> cuts = crossings(a, b);
    Point2 prev = a;
    Point2 fprev = out.back();
    for (double t : cuts) {
      const Point2 p = lerp(a, b, t);
      const Point2 fp = map_vertex(p);
      refine(prev, p, fprev, fp, 0, out);
      prev = p;
      fprev = fp;
    }
    refine(prev, b, fprev, fb, 0, out);
  }

 private:
  // Parameters in (0, 1) where [a, b] crosses a triangulation edge or passes
  // through a triangulation vertex.
  std::vector<double> crossings(Point2 a, Point2 b) const {
    std::vector<double> ts;
    const Point2 d = b - a;
    for (const auto& [i, j] : m_.edges()) {
      const Point2 e0 = src_pts_[i], e1 = src_pts_[j];
      if (predicates::segments_cross_properly(a, b, e0, e1)) {
        const Point2 e = e1 - e0;
        ts.push_back(cross(e0 - a, e) / cross(d, e));
      }
    }
    const double len_sq = dot(d, d);
    for (const Point2& v : src_pts_) {
      if (v != a && v != b && predicates::on_segment(v, a, b)) ts.push_back(dot(v - a, d) / len_sq);
    }
    std::sort(ts.begin(), ts.end());
    std::vector<double> out;
    for (double t : ts) {
      if (t <= 1e-12 || t >= 1.0 - 1e-12) continue;
      if (!out.empty() && t - out.back() <= 1e-12) continue;
      out.push_back(t);
    }
    return out;
  }

  void refine(Point2 a, Point2 b, Point2 fa, Point2 fb, int depth, std::vector<Point2>& out) const {
    if (depth < kMaxDepth) {
      const Point2 mid = lerp(a, b, 0.5);
      const Point2 fmid = map_vertex(mid);
      if (distance_to_segment(fmid, fa, fb) > max_err_) {
        refine(a, mid, fa, fmid, depth + 1, out);
        refine(mid, b, fmid, fb, depth + 1, out);
        return;
      }
    }
    if (fb != out.back()) out.push_back(fb);
  }

  const PiecewiseAffineMap& m_;
  double max_err_;
  Direction dir_;
  std::vector<Point2> src_pts_;
};

}  // namespace

Polyline map_polyline(const PiecewiseAffineMap& m, const Polyline& pl, double max_err, Direction dir) {
  if (!(max_err > 0.0)) throw GeometryError("map_polyline: max_err must be positive");
  const SegmentMapper mapper(m, max_err, dir);
  const auto& v = pl.vertices();
  std::vector<Point2> images;
  images.reserve(v.size());
  for (const Point2& p : v) images.push_back(mapper.map_vertex(p));

  std::vector<Point2> out{images.front()};
  for (std::size_t i = 1; i < v.size(); ++i) mapper.append_segment(v[i - 1], v[i], images[i], out);
  return Polyline(std::move(out));
}

std::vector<Point2> map_ring(const PiecewiseAffineMap& m, std::span<const Point2> ring, double max_err,
                             Direction dir) {
  if (ring.size() < 3) throw GeometryError("map_ring: ring needs at least 3 vertices");
  if (!(max_err > 0.0)) throw GeometryError("map_ring: max_err must be positive");
  const SegmentMapper mapper(m, max_err, dir);
  std::vector<Point2> images;
  images.reserve(ring.size());
  for (const Point2& p : ring) images.push_back(mapper.map_vertex(p));

  std::vector<Point2> out{images.front()};
  for (std::size_t i = 1; i <= ring.size(); ++i) {
    const std::size_t j = i % ring.size();
    mapper.append_segment(ring[i - 1], ring[j], images[j], out);
  }
  // The closing segment ends on the first vertex.
  if (out.size() > 1 && out.back() == out.front()) out.pop_back();
  return out;
}

// ---------------------------------------------------------------- curves

namespace {

struct Deviation {
  double distance = 0.0;
  double fraction = 0.0;
};

Deviation worst_vertex(const Polyline& curve, std::span<const double> fractions) {
  Deviation worst;
  std::size_t k = 0;
  Point2 c0 = curve.point_at(fractions[0]);
  Point2 c1 = curve.point_at(fractions[1]);
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double f = curve.fraction_at(i);
    while (k + 2 < fractions.size() && f > fractions[k + 1]) {
      ++k;
      c0 = c1;
      c1 = curve.point_at(fractions[k + 1]);
    }
    const double d = distance_to_segment(curve.vertices()[i], c0, c1);
    if (d > worst.distance) worst = {d, f};
  }
  return worst;
}

}  // namespace

double chord_deviation(const Polyline& curve, std::span<const double> fractions) {
  if (fractions.size() < 2) throw GeometryError("chord_deviation: need at least 2 fractions");
  return worst_vertex(curve, fractions).distance;
}

CurveMatch correspond_curves(const CurvePair& cp) {
  if (!(cp.tolerance > 0.0)) throw GeometryError("correspond_curves: tolerance must be positive");
  if (!(cp.curve_plan.length() > 0.0) || !(cp.curve_grid.length() > 0.0)) {
    throw GeometryError("correspond_curves: zero-length curve");
  }
  std::vector<double> fractions{0.0, 1.0};
  for (;;) {
    const Deviation p = worst_vertex(cp.curve_plan, fractions);
    const Deviation g = worst_vertex(cp.curve_grid, fractions);
    const bool p_bad = p.distance > cp.tolerance;
    const bool g_bad = g.distance > cp.tolerance;
    if (!p_bad && !g_bad) break;
    const double f = (p_bad && (!g_bad || p.distance >= g.distance)) ? p.fraction : g.fraction;
    const auto it = std::lower_bound(fractions.begin(), fractions.end(), f);
    if (it != fractions.end() && *it == f) break;  // vertex already matched
    fractions.insert(it, f);
  }

  CurveMatch out;
  out.fractions = fractions;
  out.pairs.reserve(fractions.size());
  for (double f : fractions) {
    out.pairs.push_back({cp.curve_plan.point_at(f), cp.curve_grid.point_at(f)});
  }
  return out;
}

// ---------------------------------------------------------------- json

std::string serialize_mapping(const PiecewiseAffineMap& m) {
  using ordered_json = nlohmann::ordered_json;
  const auto points = [](std::span<const Point2> pts) {
    ordered_json arr = ordered_json::array();
    for (const Point2& p : pts) arr.push_back({p.x, p.y});
    return arr;
  };
  ordered_json j;
  j["plan_points"] = points(m.plan_points());
  j["grid_points"] = points(m.grid_points());
  ordered_json tris = ordered_json::array();
  for (const auto& t : m.triangles()) tris.push_back({t[0], t[1], t[2]});
  j["triangles"] = std::move(tris);
  j["mirrored"] = m.mirrored();
  return j.dump(2) + "\n";
}

PiecewiseAffineMap parse_mapping(std::string_view text) {
  using json = nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("mapping: ") + e.what());
  }
  try {
    const auto points = [&](const char* key) {
      std::vector<Point2> out;
      for (const auto& p : j.at(key)) {
        if (p.size() != 2) throw FormatError("mapping: expected [x, y] points");
        out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      }
      return out;
    };
    std::vector<TriangleIndices> tris;
    for (const auto& t : j.at("triangles")) {
      if (t.size() != 3) throw FormatError("mapping: triangles need 3 indices");
      tris.push_back({t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>(), t.at(2).get<std::size_t>()});
    }
    Handedness handedness = Handedness::Auto;
    if (const auto it = j.find("mirrored"); it != j.end()) {
      handedness = it->get<bool>() ? Handedness::Mirror : Handedness::Preserve;
    }
    return PiecewiseAffineMap::from_parts(points("plan_points"), points("grid_points"), std::move(tris),
                                          handedness);
  } catch (const json::exception& e) {
    throw FormatError(std::string("mapping: ") + e.what());
  }
}

}  // namespace planwarp
