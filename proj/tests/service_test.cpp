#include <gtest/gtest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <thread>

#include "planwarp/errors.hpp"
#include "planwarp/map_io.hpp"
#include "planwarp/service.hpp"
#include "planwarp/session_store.hpp"
#include "test_util.hpp"

using namespace planwarp;
using namespace planwarp::service;
using nlohmann::json;

namespace {

const std::filesystem::path kDemo = std::filesystem::path(PLANWARP_FIXTURE_DIR) / "demo";

class Running {
 public:
  explicit Running(ServiceConfig cfg = {}) {
    cfg.port = 0;
    svc_ = std::make_unique<Service>(std::move(cfg));
    port_ = svc_->bind();
    thread_ = std::thread([this] { svc_->run(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  ~Running() {
    svc_->stop();
    thread_.join();
  }
  httplib::Client& http() { return *client_; }
  Service& svc() { return *svc_; }
  int port() const { return port_; }

 private:
  std::unique_ptr<Service> svc_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

json create_body(std::string grid_name = "map") {
  const Bytes pgm = read_binary_file(kDemo / "map.pgm");
  return json{{"plan", json::parse(read_text_file(kDemo / "plan.json"))},
              {"grid_pgm_base64", base64_encode(pgm)},
              {"grid_yaml", read_text_file(kDemo / "map.yaml")},
              {"grid_name", grid_name}};
}

httplib::Result post(httplib::Client& c, const std::string& path, const json& body) {
  return c.Post(path.c_str(), body.dump(), "application/json");
}

std::string create(httplib::Client& c) {
  auto r = post(c, "/sessions", create_body());
  EXPECT_EQ(r->status, 201) << r->body;
  return json::parse(r->body).at("id").get<std::string>();
}

json add_pair(httplib::Client& c, const std::string& id, Point2 plan, Point2 grid, int want = 200) {
  auto r = post(c, "/sessions/" + id + "/correspondences",
                json{{"plan", {plan.x, plan.y}}, {"grid", {grid.x, grid.y}}});
  EXPECT_EQ(r->status, want) << r->body;
  return json::parse(r->body);
}

json query(httplib::Client& c, const std::string& id, const std::string& dir, double x, double y) {
  auto r = c.Get(("/sessions/" + id + "/map?dir=" + dir + "&x=" + format_double(x) + "&y=" + format_double(y)).c_str());
  EXPECT_EQ(r->status, 200) << r->body;
  return json::parse(r->body);
}

/// Session whose plan and grid coordinates coincide on a 2 x 2 square.
std::string identity_session(httplib::Client& c) {
  const std::string id = create(c);
  for (Point2 p : {Point2{0, 0}, Point2{2, 0}, Point2{2, 2}, Point2{0, 2}}) add_pair(c, id, p, p);
  return id;
}

std::size_t occupied(const Bytes& tar) {
  const auto entries = read_tar(tar);
  const ArchiveEntry* pgm = nullptr;
  const ArchiveEntry* yaml = nullptr;
  for (const auto& e : entries) (e.name.ends_with(".pgm") ? pgm : yaml) = &e;
  const OccupancyGrid g = parse_grid(pgm->data, std::string(yaml->data.begin(), yaml->data.end()));
  return g.count(CellState::Occupied);
}

Bytes body_bytes(const httplib::Result& r) { return Bytes(r->body.begin(), r->body.end()); }

}  // namespace

TEST(Base64, RoundTrip) {
  for (std::size_t n = 0; n < 20; ++n) {
    Bytes b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(i * 37 + 11);
    EXPECT_EQ(base64_decode(base64_encode(b)), b);
  }
  EXPECT_EQ(base64_encode(Bytes{'M', 'a', 'n'}), "TWFu");
  EXPECT_THROW(base64_decode("@@@@"), FormatError);
}

TEST(Tar, RoundTripAndDeterminism) {
  const std::vector<ArchiveEntry> in{{"a.pgm", Bytes{1, 2, 3}}, {"a.yaml", Bytes(700, 'x')}};
  const Bytes t = make_tar(in);
  EXPECT_EQ(t.size() % 512, 0u);
  EXPECT_EQ(make_tar(in), t);
  const auto out = read_tar(t);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].name, "a.pgm");
  EXPECT_EQ(out[1].data, in[1].data);
}

TEST(Service, CreateListDelete) {
  Running s;
  const std::string a = create(s.http());
  const std::string b = create(s.http());
  EXPECT_NE(a, b);
  auto list = json::parse(s.http().Get("/sessions")->body).at("sessions");
  EXPECT_EQ(list.size(), 2u);
  EXPECT_EQ(s.http().Get(("/sessions/" + a).c_str())->status, 200);
  EXPECT_EQ(s.http().Delete(("/sessions/" + a).c_str())->status, 204);
  EXPECT_EQ(s.http().Get(("/sessions/" + a).c_str())->status, 404);
  EXPECT_EQ(json::parse(s.http().Get("/sessions/nope")->body).at("error"), "not_found");
}

TEST(Service, CreateFromPaths) {
  Running s;
  auto r = post(s.http(), "/sessions",
                json{{"plan_path", (kDemo / "plan.json").string()}, {"grid_path", (kDemo / "map.yaml").string()}});
  EXPECT_EQ(r->status, 201) << r->body;
}

TEST(Service, TruncatedPgmIs422) {
  Running s;
  json body = create_body();
  Bytes pgm = read_binary_file(kDemo / "map.pgm");
  pgm.resize(pgm.size() - 10);
  body["grid_pgm_base64"] = base64_encode(pgm);
  auto r = post(s.http(), "/sessions", body);
  EXPECT_EQ(r->status, 422);
  EXPECT_EQ(json::parse(r->body).at("error"), "parse_error");
  EXPECT_EQ(post(s.http(), "/sessions", json{{"plan", 1}})->status, 400);
  EXPECT_EQ(s.http().Post("/sessions", "{not json", "application/json")->status, 400);
}

TEST(Service, CorrespondencesRebuildAndDiagnostics) {
  Running s;
  const std::string id = create(s.http());
  EXPECT_EQ(add_pair(s.http(), id, {0, 0}, {0, 0})["rebuild"]["status"], "pending");
  add_pair(s.http(), id, {2, 0}, {2, 0});
  const json third = add_pair(s.http(), id, {0, 2}, {0, 2});
  EXPECT_EQ(third["index"], 2);
  EXPECT_EQ(third["rebuild"]["status"], "ok");
  EXPECT_EQ(third["rebuild"]["triangles"], 1);
  EXPECT_EQ(add_pair(s.http(), id, {0, 2}, {1, 1}, 409)["error"], "duplicate_point");
  // (3,3) sits outside the circle through the first three, so the Delaunay
  // diagonal is (2,0)-(0,2); pulling its grid image inside flips a triangle.
  const json fold = add_pair(s.http(), id, {3, 3}, {0.5, 0.5});
  EXPECT_EQ(fold["rebuild"]["status"], "fold_over");
  std::vector<std::size_t> v = fold["rebuild"]["vertices"];
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(s.http().Get(("/sessions/" + id + "/map?x=0.5&y=0.5").c_str())->status, 409);
  auto undo = s.http().Delete(("/sessions/" + id + "/correspondences/last").c_str());
  EXPECT_EQ(undo->status, 200);
  EXPECT_EQ(json::parse(undo->body)["count"], 3);
  EXPECT_EQ(json::parse(undo->body)["rebuild"]["status"], "ok");
}

TEST(Service, QueryIdentityOutsideAndAffine) {
  Running s;
  const std::string id = identity_session(s.http());
  const json q = query(s.http(), id, "fwd", 1.25, 0.75);
  EXPECT_EQ(q["outside"], false);
  EXPECT_NEAR(q["x"].get<double>(), 1.25, 1e-12);
  EXPECT_NEAR(q["y"].get<double>(), 0.75, 1e-12);
  EXPECT_EQ(query(s.http(), id, "inv", 5, 5)["outside"], true);
  EXPECT_EQ(s.http().Get(("/sessions/" + id + "/map?dir=sideways&x=1&y=1").c_str())->status, 400);
  EXPECT_EQ(s.http().Get(("/sessions/" + id + "/map?dir=fwd&x=abc&y=1").c_str())->status, 400);

  const std::string scaled = create(s.http());
  for (Point2 p : {Point2{0, 0}, Point2{10, 0}, Point2{10, 10}, Point2{0, 10}})
    add_pair(s.http(), scaled, p, 2.0 * p + Point2{5, 5});
  const json f = query(s.http(), scaled, "fwd", 2, 3);
  EXPECT_NEAR(f["x"].get<double>(), 9, 1e-12);
  EXPECT_NEAR(f["y"].get<double>(), 11, 1e-12);
}

TEST(Service, RegionsAndExport) {
  Running s;
  const std::string id = identity_session(s.http());
  const std::string path = "/sessions/" + id + "/export/nogo";
  auto plain = s.http().Get(path.c_str());
  ASSERT_EQ(plain->status, 200);
  const auto entries = read_tar(body_bytes(plain));
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].name, "map.pgm");
  EXPECT_EQ(entries[1].name, "map.yaml");
  const GridFiles original = serialize_grid(load_grid(kDemo / "map.yaml"), "map.pgm");
  EXPECT_EQ(entries[0].data, original.pgm);
  EXPECT_EQ(std::string(entries[1].data.begin(), entries[1].data.end()), original.yaml);

  auto bad = post(s.http(), "/sessions/" + id + "/regions",
                  json{{"label", "bow"}, {"polygon", {{0.2, 0.2}, {1.5, 1.5}, {1.5, 0.2}, {0.2, 1.5}}}});
  EXPECT_EQ(bad->status, 422);
  auto r = post(s.http(), "/sessions/" + id + "/regions",
                json{{"label", "desk"}, {"polygon", {{0.5, 0.5}, {1.5, 0.5}, {1.5, 1.5}, {0.5, 1.5}}}});
  EXPECT_EQ(r->status, 201) << r->body;
  EXPECT_EQ(json::parse(r->body)["index"], 0);
  const json regions = json::parse(s.http().Get(("/sessions/" + id + "/regions").c_str())->body)["regions"];
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_EQ(regions[0]["label"], "desk");

  const Bytes first = body_bytes(s.http().Get(path.c_str()));
  const Bytes second = body_bytes(s.http().Get(path.c_str()));
  EXPECT_EQ(first, second);
  EXPECT_GT(occupied(first), occupied(body_bytes(plain)));
}

TEST(Service, PoseBridge) {
  Running s;
  const std::string id = identity_session(s.http());
  const std::string path = "/sessions/" + id + "/pose";
  EXPECT_EQ(s.http().Get(path.c_str())->status, 404);
  EXPECT_EQ(post(s.http(), path, json{{"x", 1.0}, {"y", 0.5}, {"theta", 0.3}})->status, 200);
  const json p = json::parse(s.http().Get(path.c_str())->body);
  EXPECT_EQ(p["frame"], "plan");
  EXPECT_NEAR(p["x"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(p["y"].get<double>(), 0.5, 1e-12);
  EXPECT_NEAR(p["theta"].get<double>(), 0.3, 1e-12);

  const double th = 0.4;
  const std::string rot = create(s.http());
  for (Point2 q : {Point2{0, 0}, Point2{2, 0}, Point2{2, 2}, Point2{0, 2}}) {
    // Grid = plan rotated by `th` about (1, 1).
    const Point2 d = q - Point2{1, 1};
    add_pair(s.http(), rot, q, Point2{1 + std::cos(th) * d.x - std::sin(th) * d.y, 1 + std::sin(th) * d.x + std::cos(th) * d.y});
  }
  post(s.http(), "/sessions/" + rot + "/pose", json{{"x", 1.0}, {"y", 1.0}, {"theta", 1.0}});
  const json pr = json::parse(s.http().Get(("/sessions/" + rot + "/pose").c_str())->body);
  EXPECT_NEAR(pr["theta"].get<double>(), 1.0 - th, 1e-9);
  EXPECT_NEAR(pr["x"].get<double>(), 1.0, 1e-9);
}

TEST(Service, OverlayPng) {
  Running s;
  const std::string id = identity_session(s.http());
  auto r = s.http().Get(("/sessions/" + id + "/overlay.png").c_str());
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(r->body.substr(1, 3), "PNG");
}

TEST(Service, SessionLimit) {
  ServiceConfig cfg;
  cfg.max_sessions = 2;
  Running s(cfg);
  create(s.http());
  create(s.http());
  auto r = post(s.http(), "/sessions", create_body());
  EXPECT_EQ(r->status, 429);
}

TEST(Service, PersistenceAcrossRestart) {
  pwtest::TempDir dir;
  ServiceConfig cfg;
  cfg.data_dir = dir.path();
  std::string id;
  Bytes exported;
  {
    Running s(cfg);
    id = identity_session(s.http());
    post(s.http(), "/sessions/" + id + "/regions", json{{"polygon", {{0.5, 0.5}, {1.5, 0.5}, {1.5, 1.5}}}});
    post(s.http(), "/sessions/" + id + "/pose", json{{"x", 1.0}, {"y", 0.5}, {"theta", 0.3}});
    exported = body_bytes(s.http().Get(("/sessions/" + id + "/export/nogo").c_str()));
  }
  Running s(cfg);
  const auto ids = s.svc().store().ids();
  ASSERT_EQ(ids, std::vector<std::string>{id});
  EXPECT_EQ(body_bytes(s.http().Get(("/sessions/" + id + "/export/nogo").c_str())), exported);
  EXPECT_EQ(s.http().Get(("/sessions/" + id + "/pose").c_str())->status, 200);
  EXPECT_EQ(s.svc().store().snapshot(id).correspondences.pairs.size(), 4u);
}

TEST(Service, ConcurrentClients) {
  Running s;
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(create(s.http()));
  std::atomic<int> failures = 0;
  std::vector<std::thread> workers;
  for (int w = 0; w < 4; ++w) {
    workers.emplace_back([&, w] {
      httplib::Client c("127.0.0.1", s.port());
      for (int k = 0; k < 12; ++k) {
        // Each worker writes to its own session and reads from all of them.
        const Point2 p{0.1 * k, k % 2 ? 0.1 * k * k : 0.0};
        auto r = post(c, "/sessions/" + ids[w] + "/correspondences",
                      json{{"plan", {p.x + 0.01 * w, p.y}}, {"grid", {p.x, p.y + 0.01 * w}}});
        if (!r || r->status != 200) ++failures;
        for (const auto& other : ids) {
          auto g = c.Get(("/sessions/" + other).c_str());
          if (!g || g->status != 200) ++failures;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  EXPECT_EQ(failures.load(), 0);
  for (const auto& id : ids) EXPECT_EQ(s.svc().store().snapshot(id).correspondences.pairs.size(), 12u);
}
