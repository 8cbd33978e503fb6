#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "planwarp/annotate.hpp"
#include "planwarp/map_io.hpp"
#include "planwarp/mapping.hpp"

namespace planwarp::service {

/// Failure carrying the HTTP status and error code the service reports.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string code, const std::string& detail)
      : std::runtime_error(detail), status_(status), code_(std::move(code)) {}
  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }

 private:
  int status_;
  std::string code_;
};

/// Outcome of the automatic rebuild after a correspondence edit.
struct RebuildStatus {
  std::string status = "pending";  // ok | pending | fold_over | collinear | ...
  std::string detail;
  std::vector<std::size_t> vertices;
  std::size_t triangles = 0;
};

struct SessionState {
  std::string id;
  FloorPlan plan;
  OccupancyGrid grid{GridFrame{}, GridThresholds{}};
  std::string grid_name = "map";  // stem for exported map files
  CorrespondenceSet correspondences;
  std::optional<PiecewiseAffineMap> built_map;
  RebuildStatus rebuild;
  std::vector<Region> regions;
  std::optional<Pose2D> last_pose;  // grid frame, as posted
  std::uint64_t revision = 0;
};

struct AddPairResult {
  std::size_t index = 0;
  std::size_t count = 0;
  RebuildStatus rebuild;
};

struct SessionSource {
  std::string plan_json;
  Bytes grid_pgm;
  std::string grid_yaml;
  std::string grid_name = "map";
};

/// Thread-safe registry of editing sessions. Mutations on one session are
/// serialized and persisted (when a data directory is configured) before
/// the lock is released; reads share the lock.
class SessionStore {
 public:
  SessionStore(std::optional<std::filesystem::path> data_dir, std::size_t max_sessions);

  /// Loads every persisted session from the data directory. Returns the
  /// number restored; unreadable files are skipped.
  std::size_t restore();

  std::string create(const SessionSource& src);
  void remove(const std::string& id);
  std::vector<std::string> ids() const;

  AddPairResult add_correspondence(const std::string& id, Point2 plan, Point2 grid);
  /// Drops the most recent pair; returns the remaining count.
  std::size_t remove_last_correspondence(const std::string& id);

  /// nullopt when the point is outside the mapped region.
  std::optional<Point2> query(const std::string& id, Direction dir, Point2 p) const;

  std::size_t add_region(const std::string& id, Region region);
  /// Mapped outlines (grid frame) of every region; nullopt entries for
  /// regions the current map does not cover.
  std::vector<std::optional<std::vector<Point2>>> mapped_regions(const std::string& id) const;

  /// Burned grid files; a pure function of session state.
  GridFiles export_nogo(const std::string& id) const;
  std::string export_name(const std::string& id) const;

  void push_pose(const std::string& id, const Pose2D& grid_pose);
  /// Most recent pose carried into the plan frame.
  Pose2D plan_pose(const std::string& id) const;

  Bytes overlay_png(const std::string& id) const;

  /// Deep copy of the state for inspection.
  SessionState snapshot(const std::string& id) const;

 private:
  struct Session {
    explicit Session(SessionState s) : state(std::move(s)) {}
    mutable std::shared_mutex mutex;
    SessionState state;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  std::string register_session(SessionState state);
  void rebuild(SessionState& s) const;
  void persist(const SessionState& s) const;
  void persist_sources(const SessionState& s) const;

  std::optional<std::filesystem::path> data_dir_;
  std::size_t max_sessions_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// Minimal ustar archive with fixed metadata so identical contents produce
/// identical bytes.
struct ArchiveEntry {
  std::string name;
  Bytes data;
};
Bytes make_tar(const std::vector<ArchiveEntry>& entries);
std::vector<ArchiveEntry> read_tar(std::span<const std::uint8_t> archive);

std::string base64_encode(std::span<const std::uint8_t> data);
/// Throws FormatError on invalid input.
Bytes base64_decode(std::string_view text);

}  // namespace planwarp::service
