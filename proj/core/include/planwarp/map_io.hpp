#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "planwarp/geometry.hpp"
#include "planwarp/occupancy_grid.hpp"
#include "planwarp/types.hpp"

namespace planwarp {

using Bytes = std::vector<std::uint8_t>;

/// Vector floor plan in its own pixel frame (x right, y down).
struct FloorPlan {
  int width = 0;
  int height = 0;
  std::vector<Polyline> strokes;
  std::optional<std::string> backdrop;

  /// Throws FormatError when a vertex lies outside [0, width] x [0, height].
  void validate() const;
  bool contains(Point2 p) const {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= width && p.y <= height;
  }

  friend bool operator==(const FloorPlan&, const FloorPlan&) = default;
};

/// The on-disk pair for a grid: binary P5 PGM and its YAML metadata.
struct GridFiles {
  Bytes pgm;
  std::string yaml;
};

/// Parses a P5 PGM (maxval 255) plus map_server YAML. PGM row 0 is the top
/// image row; grid row 0 is the bottom row.
OccupancyGrid parse_grid(std::span<const std::uint8_t> pgm, std::string_view yaml);
/// Canonical encoding: Occupied 0, Free 254, Unknown 205 (mirrored when
/// negate is set). `image_name` becomes the YAML `image` key.
GridFiles serialize_grid(const OccupancyGrid& grid, std::string_view image_name = "map.pgm");

/// State a single pixel decodes to under the given thresholds.
CellState classify_pixel(std::uint8_t pixel, const GridThresholds& th);

/// Reads `image` from map YAML; throws FormatError when absent.
std::string yaml_image_name(std::string_view yaml);

/// Loads YAML from `yaml_path` and the PGM its `image` key names (resolved
/// relative to the YAML's directory).
OccupancyGrid load_grid(const std::filesystem::path& yaml_path);
/// Writes `<dir>/<stem>.yaml` and `<dir>/<stem>.pgm`.
void save_grid(const OccupancyGrid& grid, const std::filesystem::path& dir, std::string_view stem);

FloorPlan parse_plan(std::string_view json);
std::string serialize_plan(const FloorPlan& plan);

/// Persistent session description. Paths are stored as written; relative
/// paths are resolved against the session file's directory on load.
struct SessionFile {
  std::string plan_path;
  std::string grid_path;  // map YAML
  std::vector<CorrespondencePair> correspondences;
  std::vector<Region> regions;

  friend bool operator==(const SessionFile&, const SessionFile&) = default;
};

/// Throws FormatError on malformed JSON, empty paths or malformed entries.
/// Fewer than 3 correspondences is accepted here (sessions under
/// construction) and rejected by build_map.
SessionFile parse_session(std::string_view json);
std::string serialize_session(const SessionFile& session);

/// Session file plus the plan and grid it references.
struct LoadedSession {
  std::filesystem::path path;
  SessionFile file;
  FloorPlan plan;
  OccupancyGrid grid;
  std::filesystem::path grid_yaml;
  std::string grid_image_name;
};

/// Throws IoError when a file cannot be read, FormatError when it cannot be
/// parsed.
LoadedSession load_session(const std::filesystem::path& session_path);

std::string read_text_file(const std::filesystem::path& path);
Bytes read_binary_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);
void write_file(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace planwarp
