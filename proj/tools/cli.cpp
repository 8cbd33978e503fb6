#include "cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <charconv>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "planwarp/annotate.hpp"
#include "planwarp/errors.hpp"
#include "planwarp/map_io.hpp"
#include "planwarp/mapping.hpp"
#include "planwarp/render.hpp"
#include "planwarp/service.hpp"

namespace planwarp::cli {
namespace {

namespace fs = std::filesystem;

CorrespondenceSet correspondences_of(const SessionFile& s) {
  CorrespondenceSet cs;
  cs.pairs = s.correspondences;
  return cs;
}

void report_mapping_error(const MappingError& e, std::ostream& err) {
  err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
  if (!e.vertices().empty()) {
    err << "vertices:";
    for (std::size_t v : e.vertices()) err << " " << v;
    err << "\n";
  }
}

double parse_number(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw FormatError(where + ": '" + std::string(text) + "' is not a number");
  }
  return v;
}

std::vector<Point2> read_points_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::vector<Point2> pts;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line == "x,y") continue;
      throw FormatError(path.string() + ": expected header 'x,y'");
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected x,y");
    const std::string where = path.string() + ":" + std::to_string(line_no);
    pts.push_back({parse_number(std::string_view(line).substr(0, comma), where),
                   parse_number(std::string_view(line).substr(comma + 1), where)});
  }
  return pts;
}

Pose2D parse_pose(const std::string& text) {
  std::vector<double> v;
  std::string_view rest(text);
  while (true) {
    const auto comma = rest.find(',');
    v.push_back(parse_number(rest.substr(0, comma), "--pose"));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (v.size() != 3) throw FormatError("--pose expects x,y,theta");
  return Pose2D{{v[0], v[1]}, normalize_heading(v[2]), Frame::Grid};
}

// ---------------------------------------------------------------- commands

int cmd_build(const std::string& session_path, const std::string& out_path, std::ostream& out,
              std::ostream& err) {
  const LoadedSession s = load_session(session_path);
  const PiecewiseAffineMap m = PiecewiseAffineMap::build(correspondences_of(s.file));
  const std::string text = serialize_mapping(m);
  std::ostream& report = out_path.empty() ? err : out;
  report << "correspondences: " << m.plan_points().size() << "\n"
         << "triangles: " << m.triangles().size() << "\n"
         << "orientation: " << (m.mirrored() ? "mirrored" : "preserved") << "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    write_file(out_path, text);
  }
  return kExitOk;
}

int cmd_map(const std::string& mapping_path, const std::string& dir, const std::string& points_path,
            const std::string& out_path, std::ostream& out) {
  const PiecewiseAffineMap m = parse_mapping(read_text_file(mapping_path));
  const Direction d = dir == "inv" ? Direction::Inverse : Direction::Forward;
  std::ostringstream csv;
  csv << "x,y\n";
  for (const Point2& p : read_points_csv(points_path)) {
    if (const auto q = m.map(p, d)) {
      csv << format_double(q->x) << "," << format_double(q->y) << "\n";
    } else {
      csv << "outside\n";
    }
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    write_file(out_path, csv.str());
  }
  return kExitOk;
}

int cmd_nogo(const std::string& session_path, const std::string& out_dir, std::ostream& out) {
  const LoadedSession s = load_session(session_path);
  OccupancyGrid burned = s.grid;
  if (!s.file.regions.empty()) {
    const PiecewiseAffineMap m = PiecewiseAffineMap::build(correspondences_of(s.file));
    burned = burn_regions(m, s.file.regions, s.grid);
  }
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < burned.cells().size(); ++i) {
    if (burned.at(i) != s.grid.at(i)) ++flipped;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  save_grid(burned, out_dir, s.grid_yaml.stem().string());
  out << "flipped: " << flipped << "\n";
  return kExitOk;
}

int cmd_overlay(const std::string& session_path, const std::string& out_path, const std::string& pose_text,
                std::ostream& out) {
  const LoadedSession s = load_session(session_path);
  std::optional<Pose2D> pose;
  if (!pose_text.empty()) pose = parse_pose(pose_text);
  const PiecewiseAffineMap m = PiecewiseAffineMap::build(correspondences_of(s.file));
  const Bytes png = encode_png(render_overlay(m, s.plan, s.grid, s.file.regions, pose));
  write_file(out_path, png);
  out << "wrote " << out_path << " (" << png.size() << " bytes)\n";
  return kExitOk;
}

std::atomic<service::Service*> g_running_service{nullptr};

extern "C" void handle_stop_signal(int) {
  if (auto* svc = g_running_service.load()) svc->stop();
}

int cmd_serve(service::ServiceConfig config, std::ostream& out) {
  service::Service svc(std::move(config));
  const int port = svc.bind();
  out << "planwarp service listening on port " << port << std::endl;
  g_running_service = &svc;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  svc.run();
  g_running_service = nullptr;
  return kExitOk;
}

template <typename T>
void env_default(T& value, const char* name) {
  if (const char* v = std::getenv(name); v && *v) {
    std::istringstream in(v);
    in >> value;
  }
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"planwarp: floor plan <-> occupancy grid correspondence tools"};
  app.require_subcommand(1);

  std::string session, mapping, dir = "fwd", points, pose;
  std::string build_out, map_out, nogo_out, overlay_out;

  auto* build = app.add_subcommand("build", "triangulate a session's correspondences and report the mapping");
  build->add_option("session", session, "session JSON")->required();
  build->add_option("--out", build_out, "write the mapping JSON here (default: stdout)");

  auto* map = app.add_subcommand("map", "map a CSV of points through a mapping");
  map->add_option("mapping", mapping, "mapping JSON from 'planwarp build'")->required();
  map->add_option("points", points, "CSV with header x,y")->required();
  map->add_option("--dir", dir, "fwd (plan -> grid) or inv (grid -> plan)")
      ->check(CLI::IsMember({"fwd", "inv"}));
  map->add_option("--out", map_out, "output CSV (default: stdout)");

  auto* nogo = app.add_subcommand("nogo", "burn the session's no-go regions into the grid");
  nogo->add_option("session", session, "session JSON")->required();
  nogo->add_option("--out", nogo_out, "output directory")->required();

  auto* overlay = app.add_subcommand("overlay", "render the side-by-side overlay PNG");
  overlay->add_option("session", session, "session JSON")->required();
  overlay->add_option("--out", overlay_out, "output PNG")->default_val("overlay.png");
  overlay->add_option("--pose", pose, "robot pose in the grid frame: x,y,theta");

  service::ServiceConfig config;
  std::string data_dir, static_dir;
  env_default(config.port, "PLANWARP_PORT");
  env_default(config.max_sessions, "PLANWARP_MAX_SESSIONS");
  env_default(data_dir, "PLANWARP_DATA_DIR");
  auto* serve = app.add_subcommand("serve", "run the HTTP/JSON session service");
  serve->add_option("--port", config.port, "listen port (env PLANWARP_PORT)")->capture_default_str();
  serve->add_option("--host", config.host, "listen address")->capture_default_str();
  serve->add_option("--data-dir", data_dir, "persist sessions here (env PLANWARP_DATA_DIR)");
  serve->add_option("--max-sessions", config.max_sessions, "session limit (env PLANWARP_MAX_SESSIONS)")
      ->capture_default_str();
  serve->add_option("--ui-dir", static_dir, "serve browser UI assets under /ui");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*build) return cmd_build(session, build_out, out, err);
    if (*map) return cmd_map(mapping, dir, points, map_out, out);
    if (*nogo) return cmd_nogo(session, nogo_out, out);
    if (*overlay) return cmd_overlay(session, overlay_out, pose, out);
    if (*serve) {
      if (!data_dir.empty()) config.data_dir = data_dir;
      if (!static_dir.empty()) config.static_dir = static_dir;
      return cmd_serve(std::move(config), out);
    }
  } catch (const MappingError& e) {
    report_mapping_error(e, err);
    return kExitInvalid;
  } catch (const OutsideError& e) {
    err << "error: outside: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const GeometryError& e) {
    err << "error: geometry: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const IoError& e) {
    err << "error: io: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    err << "error: format: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitInvalid;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("planwarp");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace planwarp::cli
