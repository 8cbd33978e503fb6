#include "planwarp/session_store.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <mutex>
#include <nlohmann/json.hpp>
#include <random>

#include "planwarp/errors.hpp"
#include "planwarp/render.hpp"

namespace planwarp::service {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string new_session_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id(16, '0');
  std::uint64_t v = rng();
  for (char& c : id) {
    c = kHex[v & 0xf];
    v >>= 4;
  }
  return id;
}

ServiceError not_found(const std::string& what) { return ServiceError(404, "not_found", what); }

ServiceError no_map(const SessionState& s) {
  return ServiceError(409, "no_map",
                      s.correspondences.pairs.size() < 3
                          ? "need at least 3 correspondences (have " +
                                std::to_string(s.correspondences.pairs.size()) + ")"
                          : "correspondences do not form a valid map: " + s.rebuild.detail);
}

void write_atomic(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  write_file(tmp, text);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace

SessionStore::SessionStore(std::optional<std::filesystem::path> data_dir, std::size_t max_sessions)
    : data_dir_(std::move(data_dir)), max_sessions_(max_sessions) {
  if (data_dir_) {
    std::error_code ec;
    std::filesystem::create_directories(*data_dir_, ec);
    if (ec) throw IoError("cannot create data dir " + data_dir_->string() + ": " + ec.message());
  }
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw not_found("unknown session '" + id + "'");
  return it->second;
}

std::string SessionStore::register_session(SessionState state) {
  std::unique_lock lock(registry_mutex_);
  if (sessions_.size() >= max_sessions_) {
    throw ServiceError(429, "too_many_sessions",
                       "session limit of " + std::to_string(max_sessions_) + " reached");
  }
  if (state.id.empty()) {
    do {
      state.id = new_session_id();
    } while (sessions_.contains(state.id));
  }
  const std::string id = state.id;
  sessions_.emplace(id, std::make_shared<Session>(std::move(state)));
  return id;
}

std::string SessionStore::create(const SessionSource& src) {
  SessionState state;
  state.grid_name = src.grid_name.empty() ? "map" : src.grid_name;
  try {
    state.plan = parse_plan(src.plan_json);
    state.grid = parse_grid(src.grid_pgm, src.grid_yaml);
  } catch (const FormatError& e) {
    throw ServiceError(422, "parse_error", e.what());
  }
  const std::string id = register_session(std::move(state));
  const auto session = find(id);
  std::unique_lock lock(session->mutex);
  persist_sources(session->state);
  persist(session->state);
  return id;
}

void SessionStore::remove(const std::string& id) {
  {
    std::unique_lock lock(registry_mutex_);
    if (sessions_.erase(id) == 0) throw not_found("unknown session '" + id + "'");
  }
  if (data_dir_) {
    std::error_code ec;
    for (const char* suffix : {".session.json", ".plan.json", ".pgm", ".yaml"}) {
      std::filesystem::remove(*data_dir_ / (id + suffix), ec);
    }
  }
}

std::vector<std::string> SessionStore::ids() const {
  std::shared_lock lock(registry_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

void SessionStore::rebuild(SessionState& s) const {
  s.built_map.reset();
  s.rebuild = {};
  if (s.correspondences.pairs.size() < 3) {
    s.rebuild.status = "pending";
    s.rebuild.detail = "need at least 3 correspondences";
    return;
  }
  try {
    s.built_map = PiecewiseAffineMap::build(s.correspondences);
    s.rebuild.status = "ok";
    s.rebuild.triangles = s.built_map->triangles().size();
  } catch (const MappingError& e) {
    s.rebuild.status = to_string(e.kind());
    s.rebuild.detail = e.what();
    s.rebuild.vertices = e.vertices();
  } catch (const Error& e) {
    s.rebuild.status = "invalid";
    s.rebuild.detail = e.what();
  }
}

AddPairResult SessionStore::add_correspondence(const std::string& id, Point2 plan, Point2 grid) {
  if (!plan.finite() || !grid.finite()) throw ServiceError(422, "invalid_point", "non-finite coordinate");
  const auto session = find(id);
  std::unique_lock lock(session->mutex);
  SessionState& s = session->state;
  for (std::size_t i = 0; i < s.correspondences.pairs.size(); ++i) {
    const auto& p = s.correspondences.pairs[i];
    if (p.plan == plan) {
      throw ServiceError(409, "duplicate_point", "plan point duplicates pair " + std::to_string(i));
    }
    if (p.grid == grid) {
      throw ServiceError(409, "duplicate_point", "grid point duplicates pair " + std::to_string(i));
    }
  }
  s.correspondences.pairs.push_back({plan, grid});
  rebuild(s);
  ++s.revision;
  persist(s);
  return {s.correspondences.pairs.size() - 1, s.correspondences.pairs.size(), s.rebuild};
}

std::size_t SessionStore::remove_last_correspondence(const std::string& id) {
  const auto session = find(id);
  std::unique_lock lock(session->mutex);
  SessionState& s = session->state;
  if (s.correspondences.pairs.empty()) throw ServiceError(409, "empty", "no correspondences to remove");
  s.correspondences.pairs.pop_back();
  rebuild(s);
  ++s.revision;
  persist(s);
  return s.correspondences.pairs.size();
}

std::optional<Point2> SessionStore::query(const std::string& id, Direction dir, Point2 p) const {
  const auto session = find(id);
  std::shared_lock lock(session->mutex);
  const SessionState& s = session->state;
  if (!s.built_map) throw no_map(s);
  return s.built_map->map(p, dir);
}

std::size_t SessionStore::add_region(const std::string& id, Region region) {
  if (region.polygon.size() < 3) throw ServiceError(422, "invalid_region", "region needs at least 3 vertices");
  if (!is_simple_polygon(region.polygon)) {
    throw ServiceError(422, "invalid_region", "region polygon is self-intersecting");
  }
  const auto session = find(id);
  std::unique_lock lock(session->mutex);
  SessionState& s = session->state;
  for (const Point2& p : region.polygon) {
    if (!s.plan.contains(p)) throw ServiceError(422, "invalid_region", "region vertex outside the plan");
  }
  s.regions.push_back(std::move(region));
  ++s.revision;
  persist(s);
  return s.regions.size() - 1;
}

std::vector<std::optional<std::vector<Point2>>> SessionStore::mapped_regions(const std::string& id) const {
  const auto session = find(id);
  std::shared_lock lock(session->mutex);
  const SessionState& s = session->state;
  std::vector<std::optional<std::vector<Point2>>> out;
  for (const Region& r : s.regions) {
    if (!s.built_map) {
      out.emplace_back();
      continue;
    }
    try {
      out.emplace_back(map_region(*s.built_map, r, s.grid.resolution()));
    } catch (const Error&) {
      out.emplace_back();
    }
  }
  return out;
}

GridFiles SessionStore::export_nogo(const std::string& id) const {
  const auto session = find(id);
  std::shared_lock lock(session->mutex);
  const SessionState& s = session->state;
  const std::string image = s.grid_name + ".pgm";
  if (s.regions.empty()) return serialize_grid(s.grid, image);
  if (!s.built_map) throw no_map(s);
  try {
    return serialize_grid(burn_regions(*s.built_map, s.regions, s.grid), image);
  } catch (const OutsideError& e) {
    throw ServiceError(422, "outside", e.what());
  } catch (const GeometryError& e) {
    throw ServiceError(422, "invalid_region", e.what());
  }
}

std::string SessionStore::export_name(const std::string& id) const {
  const auto session = find(id);
  std::shared_lock lock(session->mutex);
  return session->state.grid_name;
}

void SessionStore::push_pose(const std::string& id, const Pose2D& grid_pose) {
  if (!grid_pose.position.finite() || !std::isfinite(grid_pose.heading)) {
    throw ServiceError(422, "invalid_pose", "non-finite pose");
  }
  const auto session = find(id);
  std::unique_lock lock(session->mutex);
  SessionState& s = session->state;
  s.last_pose = Pose2D{grid_pose.position, normalize_heading(grid_pose.heading), Frame::Grid};
  ++s.revision;
  persist(s);
}

Pose2D SessionStore::plan_pose(const std::string& id) const {
  const auto session = find(id);
  std::shared_lock lock(session->mutex);
  const SessionState& s = session->state;
  if (!s.last_pose) throw not_found("no pose posted yet");
  if (!s.built_map) throw no_map(s);
  try {
    return map_pose(*s.built_map, *s.last_pose);
  } catch (const OutsideError& e) {
    throw ServiceError(422, "outside", e.what());
  }
}

Bytes SessionStore::overlay_png(const std::string& id) const {
  const auto session = find(id);
  std::shared_lock lock(session->mutex);
  const SessionState& s = session->state;
  if (!s.built_map) throw no_map(s);
  return encode_png(render_overlay(*s.built_map, s.plan, s.grid, s.regions, s.last_pose));
}

SessionState SessionStore::snapshot(const std::string& id) const {
  const auto session = find(id);
  std::shared_lock lock(session->mutex);
  return session->state;
}

// ---------------------------------------------------------------- persistence

void SessionStore::persist_sources(const SessionState& s) const {
  if (!data_dir_) return;
  write_atomic(*data_dir_ / (s.id + ".plan.json"), serialize_plan(s.plan));
  const GridFiles files = serialize_grid(s.grid, s.id + ".pgm");
  write_file(*data_dir_ / (s.id + ".pgm"), files.pgm);
  write_atomic(*data_dir_ / (s.id + ".yaml"), files.yaml);
}

void SessionStore::persist(const SessionState& s) const {
  if (!data_dir_) return;
  SessionFile file{s.id + ".plan.json", s.id + ".yaml", s.correspondences.pairs, s.regions};
  ordered_json j = ordered_json::parse(serialize_session(file));
  j["id"] = s.id;
  j["grid_name"] = s.grid_name;
  if (s.last_pose) {
    j["pose"] = {{"x", s.last_pose->position.x},
                 {"y", s.last_pose->position.y},
                 {"theta", s.last_pose->heading}};
  } else {
    j["pose"] = nullptr;
  }
  write_atomic(*data_dir_ / (s.id + ".session.json"), j.dump(2) + "\n");
}

std::size_t SessionStore::restore() {
  if (!data_dir_) return 0;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(*data_dir_)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 13 && name.ends_with(".session.json")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::size_t restored = 0;
  for (const auto& path : files) {
    try {
      const LoadedSession loaded = load_session(path);
      const json extra = json::parse(read_text_file(path));
      SessionState s;
      s.id = extra.at("id").get<std::string>();
      s.plan = loaded.plan;
      s.grid = loaded.grid;
      s.grid_name = extra.value("grid_name", std::string("map"));
      s.correspondences.pairs = loaded.file.correspondences;
      s.regions = loaded.file.regions;
      if (const auto it = extra.find("pose"); it != extra.end() && it->is_object()) {
        s.last_pose = Pose2D{{it->at("x").get<double>(), it->at("y").get<double>()},
                             it->at("theta").get<double>(), Frame::Grid};
      }
      rebuild(s);
      {
        std::shared_lock lock(registry_mutex_);
        if (sessions_.contains(s.id)) continue;
      }
      register_session(std::move(s));
      ++restored;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "planwarp: skipping %s: %s\n", path.string().c_str(), e.what());
    }
  }
  return restored;
}

// ---------------------------------------------------------------- archive

namespace {

constexpr std::size_t kBlock = 512;

void put_octal(std::uint8_t* field, std::size_t width, std::uint64_t value) {
  // width-1 octal digits followed by NUL.
  for (std::size_t i = width - 1; i-- > 0;) {
    field[i] = static_cast<std::uint8_t>('0' + (value & 7));
    value >>= 3;
  }
  field[width - 1] = 0;
}

std::uint64_t get_octal(const std::uint8_t* field, std::size_t width) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width && field[i] >= '0' && field[i] <= '7'; ++i) v = v * 8 + (field[i] - '0');
  return v;
}

}  // namespace

Bytes make_tar(const std::vector<ArchiveEntry>& entries) {
  Bytes out;
  for (const ArchiveEntry& e : entries) {
    if (e.name.empty() || e.name.size() > 99) throw Error("tar: bad entry name '" + e.name + "'");
    std::array<std::uint8_t, kBlock> h{};
    std::copy(e.name.begin(), e.name.end(), h.begin());
    put_octal(&h[100], 8, 0644);
    put_octal(&h[108], 8, 0);
    put_octal(&h[116], 8, 0);
    put_octal(&h[124], 12, e.data.size());
    put_octal(&h[136], 12, 0);
    std::fill(&h[148], &h[156], ' ');
    h[156] = '0';
    const char magic[] = "ustar";
    std::copy(magic, magic + 6, &h[257]);
    h[263] = '0';
    h[264] = '0';
    unsigned sum = 0;
    for (std::uint8_t b : h) sum += b;
    put_octal(&h[148], 7, sum);
    h[155] = ' ';
    out.insert(out.end(), h.begin(), h.end());
    out.insert(out.end(), e.data.begin(), e.data.end());
    out.resize(out.size() + (kBlock - e.data.size() % kBlock) % kBlock, 0);
  }
  out.resize(out.size() + 2 * kBlock, 0);
  return out;
}

std::vector<ArchiveEntry> read_tar(std::span<const std::uint8_t> archive) {
  std::vector<ArchiveEntry> out;
  std::size_t pos = 0;
  while (pos + kBlock <= archive.size()) {
    const std::uint8_t* h = archive.data() + pos;
    if (std::all_of(h, h + kBlock, [](std::uint8_t b) { return b == 0; })) break;
    ArchiveEntry e;
    e.name.assign(reinterpret_cast<const char*>(h), strnlen(reinterpret_cast<const char*>(h), 100));
    const std::uint64_t size = get_octal(h + 124, 12);
    pos += kBlock;
    if (pos + size > archive.size()) throw FormatError("tar: truncated entry '" + e.name + "'");
    e.data.assign(archive.begin() + pos, archive.begin() + pos + size);
    pos += (size + kBlock - 1) / kBlock * kBlock;
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------- base64

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    const std::uint32_t n = (std::uint32_t{data[i]} << 16) |
                            (i + 1 < data.size() ? std::uint32_t{data[i + 1]} << 8 : 0) |
                            (i + 2 < data.size() ? std::uint32_t{data[i + 2]} : 0);
    out.push_back(kB64[(n >> 18) & 63]);
    out.push_back(kB64[(n >> 12) & 63]);
    out.push_back(i + 1 < data.size() ? kB64[(n >> 6) & 63] : '=');
    out.push_back(i + 2 < data.size() ? kB64[n & 63] : '=');
  }
  return out;
}

Bytes base64_decode(std::string_view text) {
  std::array<int, 256> rev;
  rev.fill(-1);
  for (int i = 0; i < 64; ++i) rev[static_cast<unsigned char>(kB64[i])] = i;
  Bytes out;
  std::uint32_t acc = 0;
  int bits = 0;
  std::size_t pad = 0;
  for (char c : text) {
    if (c == '=') {
      ++pad;
      continue;
    }
    if (c == '\n' || c == '\r' || c == ' ') continue;
    const int v = rev[static_cast<unsigned char>(c)];
    if (v < 0 || pad > 0) throw FormatError("invalid base64 input");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  if (pad > 2) throw FormatError("invalid base64 padding");
  return out;
}

}  // namespace planwarp::service
