#include "planwarp/map_io.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <sstream>

#include "planwarp/errors.hpp"

namespace planwarp {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

// ---------------------------------------------------------------- files

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Bytes read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------- grid

namespace {

class PgmReader {
 public:
  explicit PgmReader(std::span<const std::uint8_t> data) : data_(data) {}

  void expect_magic() {
    if (data_.size() < 2 || data_[0] != 'P' || data_[1] != '5') {
      throw FormatError("PGM: expected binary P5 magic");
    }
    pos_ = 2;
  }

  int read_header_int(const char* what) {
    skip_space_and_comments();
    if (pos_ >= data_.size() || !std::isdigit(data_[pos_])) {
      throw FormatError(std::string("PGM: malformed header, expected ") + what);
    }
    long value = 0;
    while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
      value = value * 10 + (data_[pos_++] - '0');
      if (value > 1'000'000) throw FormatError(std::string("PGM: ") + what + " too large");
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void end_header() {
    if (pos_ >= data_.size() || !std::isspace(data_[pos_])) {
      throw FormatError("PGM: malformed header, missing whitespace before raster");
    }
    ++pos_;
  }

  std::span<const std::uint8_t> raster(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw FormatError("PGM: truncated pixel data (" + std::to_string(data_.size() - pos_) +
                        " of " + std::to_string(n) + " bytes)");
    }
    return data_.subspan(pos_, n);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      if (std::isspace(data_[pos_])) {
        ++pos_;
      } else if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

YAML::Node load_yaml(std::string_view text) {
  try {
    YAML::Node root = YAML::Load(std::string(text));
    if (!root.IsMap()) throw FormatError("map YAML: expected a mapping at top level");
    return root;
  } catch (const YAML::Exception& e) {
    throw FormatError(std::string("map YAML: ") + e.what());
  }
}

template <typename T>
T yaml_required(const YAML::Node& root, const char* key) {
  const YAML::Node node = root[key];
  if (!node) throw FormatError(std::string("map YAML: missing key '") + key + "'");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw FormatError(std::string("map YAML: bad value for '") + key + "'");
  }
}

bool yaml_negate(const YAML::Node& root) {
  const YAML::Node node = root["negate"];
  if (!node) throw FormatError("map YAML: missing key 'negate'");
  const std::string text = node.as<std::string>("");
  if (text == "0" || text == "false") return false;
  if (text == "1" || text == "true") return true;
  throw FormatError("map YAML: negate must be 0 or 1");
}

std::uint8_t canonical_pixel(CellState s, bool negate) {
  std::uint8_t v = 205;
  if (s == CellState::Occupied) v = 0;
  if (s == CellState::Free) v = 254;
  return negate ? static_cast<std::uint8_t>(255 - v) : v;
}

// Canonical value when it decodes correctly, otherwise the nearest pixel
// value that does.
std::array<std::uint8_t, 3> encoding_table(const GridThresholds& th) {
  std::array<std::uint8_t, 3> table{};
  std::array<bool, 3> ok{};
  for (CellState s : {CellState::Free, CellState::Occupied, CellState::Unknown}) {
    const auto idx = static_cast<std::size_t>(s);
    const int canon = canonical_pixel(s, th.negate);
    for (int d = 0; d <= 255 && !ok[idx]; ++d) {
      for (int v : {canon - d, canon + d}) {
        if (v < 0 || v > 255) continue;
        if (classify_pixel(static_cast<std::uint8_t>(v), th) == s) {
          table[idx] = static_cast<std::uint8_t>(v);
          ok[idx] = true;
          break;
        }
      }
    }
  }
  for (CellState s : {CellState::Free, CellState::Occupied, CellState::Unknown}) {
    if (!ok[static_cast<std::size_t>(s)]) table[static_cast<std::size_t>(s)] = 0;
  }
  return table;
}

bool representable(CellState s, const GridThresholds& th) {
  return classify_pixel(encoding_table(th)[static_cast<std::size_t>(s)], th) == s;
}

}  // namespace

CellState classify_pixel(std::uint8_t pixel, const GridThresholds& th) {
  const double p = th.negate ? pixel / 255.0 : (255 - pixel) / 255.0;
  if (p > th.occupied) return CellState::Occupied;
  if (p < th.free) return CellState::Free;
  return CellState::Unknown;
}

OccupancyGrid parse_grid(std::span<const std::uint8_t> pgm, std::string_view yaml) {
  const YAML::Node root = load_yaml(yaml);
  GridFrame frame;
  frame.resolution = yaml_required<double>(root, "resolution");
  const auto origin = yaml_required<std::vector<double>>(root, "origin");
  if (origin.size() < 2 || origin.size() > 3) throw FormatError("map YAML: origin must be [x, y, yaw]");
  if (origin.size() == 3 && origin[2] != 0.0) {
    throw FormatError("map YAML: non-zero origin yaw is not supported");
  }
  frame.origin = {origin[0], origin[1]};
  GridThresholds th;
  th.occupied = yaml_required<double>(root, "occupied_thresh");
  th.free = yaml_required<double>(root, "free_thresh");
  th.negate = yaml_negate(root);

  PgmReader reader(pgm);
  reader.expect_magic();
  frame.width = reader.read_header_int("width");
  frame.height = reader.read_header_int("height");
  const int maxval = reader.read_header_int("maxval");
  if (maxval != 255) throw FormatError("PGM: maxval must be 255, got " + std::to_string(maxval));
  reader.end_header();
  const auto raster = reader.raster(frame.cell_count());

  std::vector<CellState> cells(frame.cell_count());
  for (int y = 0; y < frame.height; ++y) {
    const int row = frame.height - 1 - y;
    for (int x = 0; x < frame.width; ++x) {
      cells[frame.index(x, row)] =
          classify_pixel(raster[static_cast<std::size_t>(y) * frame.width + x], th);
    }
  }
  return OccupancyGrid(frame, th, std::move(cells));
}

GridFiles serialize_grid(const OccupancyGrid& grid, std::string_view image_name) {
  const GridFrame& f = grid.frame();
  const auto table = encoding_table(grid.thresholds());
  for (CellState s : {CellState::Free, CellState::Occupied, CellState::Unknown}) {
    if (!representable(s, grid.thresholds()) && grid.count(s) > 0) {
      throw FormatError(std::string("grid thresholds leave no pixel value for state ") + to_string(s));
    }
  }

  GridFiles out;
  const std::string header =
      "P5\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
  out.pgm.reserve(header.size() + f.cell_count());
  out.pgm.assign(header.begin(), header.end());
  for (int y = 0; y < f.height; ++y) {
    const int row = f.height - 1 - y;
    for (int x = 0; x < f.width; ++x) {
      out.pgm.push_back(table[static_cast<std::size_t>(grid.at(x, row))]);
    }
  }

  const GridThresholds& th = grid.thresholds();
  std::ostringstream yaml;
  yaml << "image: " << image_name << "\n"
       << "resolution: " << format_double(f.resolution) << "\n"
       << "origin: [" << format_double(f.origin.x) << ", " << format_double(f.origin.y) << ", 0.0]\n"
       << "occupied_thresh: " << format_double(th.occupied) << "\n"
       << "free_thresh: " << format_double(th.free) << "\n"
       << "negate: " << (th.negate ? 1 : 0) << "\n";
  out.yaml = yaml.str();
  return out;
}

std::string yaml_image_name(std::string_view yaml) {
  return yaml_required<std::string>(load_yaml(yaml), "image");
}

OccupancyGrid load_grid(const std::filesystem::path& yaml_path) {
  const std::string yaml = read_text_file(yaml_path);
  std::filesystem::path image = yaml_image_name(yaml);
  if (image.is_relative()) image = yaml_path.parent_path() / image;
  return parse_grid(read_binary_file(image), yaml);
}

void save_grid(const OccupancyGrid& grid, const std::filesystem::path& dir, std::string_view stem) {
  const std::string image = std::string(stem) + ".pgm";
  const GridFiles files = serialize_grid(grid, image);
  write_file(dir / image, files.pgm);
  write_file(dir / (std::string(stem) + ".yaml"), files.yaml);
}

// ---------------------------------------------------------------- plan

namespace {

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

Point2 point_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw FormatError(std::string(what) + ": expected a point [x, y]");
  }
  const Point2 p{j[0].get<double>(), j[1].get<double>()};
  if (!p.finite()) throw FormatError(std::string(what) + ": non-finite coordinate");
  return p;
}

ordered_json point_to_json(Point2 p) { return ordered_json::array({p.x, p.y}); }

std::vector<Point2> points_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + ": expected a list of points");
  std::vector<Point2> pts;
  pts.reserve(j.size());
  for (const json& p : j) pts.push_back(point_from_json(p, what));
  return pts;
}

const json& member(const json& obj, const char* key, const char* what) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(std::string(what) + ": missing key '" + key + "'");
  return *it;
}

}  // namespace

void FloorPlan::validate() const {
  if (width <= 0 || height <= 0) throw FormatError("plan: width and height must be positive");
  for (std::size_t s = 0; s < strokes.size(); ++s) {
    for (const Point2& p : strokes[s].vertices()) {
      if (!contains(p)) {
        throw FormatError("plan: stroke " + std::to_string(s) + " vertex (" + format_double(p.x) +
                          ", " + format_double(p.y) + ") outside the plan bounds");
      }
    }
  }
}

FloorPlan parse_plan(std::string_view text) {
  const json j = parse_json(text, "plan");
  if (!j.is_object()) throw FormatError("plan: expected a JSON object");
  FloorPlan plan;
  const json& w = member(j, "width", "plan");
  const json& h = member(j, "height", "plan");
  if (!w.is_number_integer() || !h.is_number_integer()) {
    throw FormatError("plan: width and height must be integers");
  }
  plan.width = w.get<int>();
  plan.height = h.get<int>();
  const json& strokes = member(j, "strokes", "plan");
  if (!strokes.is_array()) throw FormatError("plan: strokes must be a list");
  for (std::size_t i = 0; i < strokes.size(); ++i) {
    std::vector<Point2> pts = points_from_json(strokes[i], "plan stroke");
    if (pts.size() < 2) {
      throw FormatError("plan: stroke " + std::to_string(i) + " has fewer than 2 vertices");
    }
    try {
      plan.strokes.emplace_back(std::move(pts));
    } catch (const GeometryError& e) {
      throw FormatError("plan: stroke " + std::to_string(i) + ": " + e.what());
    }
  }
  if (const auto it = j.find("backdrop"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw FormatError("plan: backdrop must be a string or null");
    plan.backdrop = it->get<std::string>();
  }
  plan.validate();
  return plan;
}

std::string serialize_plan(const FloorPlan& plan) {
  ordered_json j;
  j["width"] = plan.width;
  j["height"] = plan.height;
  ordered_json strokes = ordered_json::array();
  for (const Polyline& s : plan.strokes) {
    ordered_json pts = ordered_json::array();
    for (const Point2& p : s.vertices()) pts.push_back(point_to_json(p));
    strokes.push_back(std::move(pts));
  }
  j["strokes"] = std::move(strokes);
  j["backdrop"] = plan.backdrop ? ordered_json(*plan.backdrop) : ordered_json(nullptr);
  return j.dump();
}

// ---------------------------------------------------------------- session

SessionFile parse_session(std::string_view text) {
  const json j = parse_json(text, "session");
  if (!j.is_object()) throw FormatError("session: expected a JSON object");
  SessionFile s;
  const json& plan = member(j, "plan", "session");
  const json& grid = member(j, "grid", "session");
  if (!plan.is_string() || !grid.is_string()) throw FormatError("session: plan and grid must be paths");
  s.plan_path = plan.get<std::string>();
  s.grid_path = grid.get<std::string>();
  if (s.plan_path.empty() || s.grid_path.empty()) throw FormatError("session: empty path");

  if (const auto it = j.find("correspondences"); it != j.end()) {
    if (!it->is_array()) throw FormatError("session: correspondences must be a list");
    for (const json& pair : *it) {
      if (!pair.is_array() || pair.size() != 2) {
        throw FormatError("session: correspondence must be [[px,py],[gx,gy]]");
      }
      s.correspondences.push_back({point_from_json(pair[0], "session correspondence"),
                                   point_from_json(pair[1], "session correspondence")});
    }
  }
  if (const auto it = j.find("regions"); it != j.end()) {
    if (!it->is_array()) throw FormatError("session: regions must be a list");
    for (const json& r : *it) {
      if (!r.is_object()) throw FormatError("session: region must be an object");
      Region region;
      if (const auto label = r.find("label"); label != r.end()) {
        if (!label->is_string()) throw FormatError("session: region label must be a string");
        region.label = label->get<std::string>();
      }
      region.polygon = points_from_json(member(r, "polygon", "session region"), "session region");
      s.regions.push_back(std::move(region));
    }
  }
  return s;
}

std::string serialize_session(const SessionFile& s) {
  ordered_json j;
  j["plan"] = s.plan_path;
  j["grid"] = s.grid_path;
  ordered_json pairs = ordered_json::array();
  for (const auto& c : s.correspondences) {
    pairs.push_back(ordered_json::array({point_to_json(c.plan), point_to_json(c.grid)}));
  }
  j["correspondences"] = std::move(pairs);
  ordered_json regions = ordered_json::array();
  for (const Region& r : s.regions) {
    ordered_json poly = ordered_json::array();
    for (const Point2& p : r.polygon) poly.push_back(point_to_json(p));
    regions.push_back({{"label", r.label}, {"polygon", std::move(poly)}});
  }
  j["regions"] = std::move(regions);
  return j.dump(2) + "\n";
}

LoadedSession load_session(const std::filesystem::path& session_path) {
  SessionFile file = parse_session(read_text_file(session_path));
  const auto base = session_path.parent_path();
  const auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base / path : path;
  };
  const auto plan_path = resolve(file.plan_path);
  const auto grid_yaml = resolve(file.grid_path);
  FloorPlan plan = parse_plan(read_text_file(plan_path));
  const std::string yaml = read_text_file(grid_yaml);
  std::string image_name = yaml_image_name(yaml);
  std::filesystem::path image(image_name);
  if (image.is_relative()) image = grid_yaml.parent_path() / image;
  OccupancyGrid grid = parse_grid(read_binary_file(image), yaml);
  return LoadedSession{session_path, std::move(file), std::move(plan), std::move(grid), grid_yaml,
                       std::move(image_name)};
}

}  // namespace planwarp
