#include "planwarp/service.hpp"

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <nlohmann/json.hpp>

#include "planwarp/errors.hpp"

namespace planwarp::service {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& detail) {
  send_json(res, status, ordered_json{{"error", code}, {"detail", detail}});
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ServiceError(400, "bad_request", std::string("invalid JSON body: ") + e.what());
  }
}

Point2 point_field(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end()) throw ServiceError(400, "bad_request", std::string("missing '") + key + "'");
  const json& v = *it;
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  if (v.is_object() && v.contains("x") && v.contains("y") && v["x"].is_number() && v["y"].is_number()) {
    return {v["x"].get<double>(), v["y"].get<double>()};
  }
  throw ServiceError(400, "bad_request", std::string("'") + key + "' must be [x, y] or {x, y}");
}

double number_field(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_number()) {
    throw ServiceError(400, "bad_request", std::string("missing number '") + key + "'");
  }
  return it->get<double>();
}

double query_number(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) throw ServiceError(400, "bad_request", std::string("missing query '") + key + "'");
  const std::string text = req.get_param_value(key);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw ServiceError(400, "bad_request", std::string("query '") + key + "' is not a number");
  }
  return v;
}

ordered_json point_json(Point2 p) { return ordered_json{{"x", p.x}, {"y", p.y}}; }

ordered_json rebuild_json(const RebuildStatus& r) {
  ordered_json j{{"status", r.status}};
  if (r.status == "ok") j["triangles"] = r.triangles;
  if (!r.detail.empty()) j["detail"] = r.detail;
  if (!r.vertices.empty()) j["vertices"] = r.vertices;
  return j;
}

ordered_json pose_json(const Pose2D& p) {
  return ordered_json{{"x", p.position.x},
                      {"y", p.position.y},
                      {"theta", p.heading},
                      {"frame", p.frame == Frame::Plan ? "plan" : "grid"}};
}

SessionSource source_from_request(const json& body) {
  SessionSource src;
  try {
    if (body.contains("plan_path") || body.contains("grid_path")) {
      const std::filesystem::path yaml_path = body.at("grid_path").get<std::string>();
      src.plan_json = read_text_file(body.at("plan_path").get<std::string>());
      src.grid_yaml = read_text_file(yaml_path);
      std::filesystem::path image = yaml_image_name(src.grid_yaml);
      if (image.is_relative()) image = yaml_path.parent_path() / image;
      src.grid_pgm = read_binary_file(image);
      src.grid_name = yaml_path.stem().string();
    } else {
      const json& plan = body.at("plan");
      src.plan_json = plan.is_string() ? plan.get<std::string>() : plan.dump();
      src.grid_pgm = base64_decode(body.at("grid_pgm_base64").get<std::string>());
      src.grid_yaml = body.at("grid_yaml").get<std::string>();
    }
    if (const auto it = body.find("grid_name"); it != body.end()) src.grid_name = it->get<std::string>();
  } catch (const json::exception& e) {
    throw ServiceError(400, "bad_request", std::string("create session: ") + e.what());
  } catch (const IoError& e) {
    throw ServiceError(422, "io_error", e.what());
  } catch (const FormatError& e) {
    throw ServiceError(422, "parse_error", e.what());
  }
  if (src.grid_name.empty() || src.grid_name.find('/') != std::string::npos) {
    throw ServiceError(400, "bad_request", "grid_name must be a plain file stem");
  }
  return src;
}

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceConfig cfg) : config(std::move(cfg)), store(config.data_dir, config.max_sessions) {}

  ServiceConfig config;
  SessionStore store;
  httplib::Server server;
  int port = -1;

  // Wraps a handler so ServiceError and library errors become JSON errors.
  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const ServiceError& e) {
        send_error(res, e.status(), e.code(), e.what());
      } catch (const FormatError& e) {
        send_error(res, 422, "parse_error", e.what());
      } catch (const OutsideError& e) {
        send_error(res, 422, "outside", e.what());
      } catch (const GeometryError& e) {
        send_error(res, 422, "invalid_geometry", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  void routes() {
    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = store.create(source_from_request(parse_body(req)));
      send_json(res, 201, ordered_json{{"id", id}});
    }));

    server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, ordered_json{{"sessions", store.ids()}});
    }));

    server.Get(R"(/sessions/([0-9a-zA-Z_-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const SessionState s = store.snapshot(req.matches[1]);
      ordered_json pairs = ordered_json::array();
      for (const auto& p : s.correspondences.pairs) {
        pairs.push_back({{"plan", point_json(p.plan)}, {"grid", point_json(p.grid)}});
      }
      ordered_json regions = ordered_json::array();
      for (const Region& r : s.regions) {
        ordered_json poly = ordered_json::array();
        for (const Point2& p : r.polygon) poly.push_back({p.x, p.y});
        regions.push_back({{"label", r.label}, {"polygon", poly}});
      }
      ordered_json tris = ordered_json::array();
      if (s.built_map) {
        for (const auto& t : s.built_map->triangles()) tris.push_back({t[0], t[1], t[2]});
      }
      const GridFrame& f = s.grid.frame();
      send_json(res, 200,
                ordered_json{{"id", s.id},
                             {"revision", s.revision},
                             {"plan", {{"width", s.plan.width}, {"height", s.plan.height}}},
                             {"grid",
                              {{"width", f.width},
                               {"height", f.height},
                               {"resolution", f.resolution},
                               {"origin", {f.origin.x, f.origin.y}}}},
                             {"correspondences", pairs},
                             {"rebuild", rebuild_json(s.rebuild)},
                             {"triangles", tris},
                             {"regions", regions},
                             {"has_pose", s.last_pose.has_value()}});
    }));

    server.Delete(R"(/sessions/([0-9a-zA-Z_-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      store.remove(req.matches[1]);
      res.status = 204;
    }));

    server.Post(R"(/sessions/([0-9a-zA-Z_-]+)/correspondences)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_body(req);
                  const AddPairResult r =
                      store.add_correspondence(req.matches[1], point_field(body, "plan"), point_field(body, "grid"));
                  send_json(res, 200,
                            ordered_json{{"index", r.index}, {"count", r.count}, {"rebuild", rebuild_json(r.rebuild)}});
                }));

    server.Delete(R"(/sessions/([0-9a-zA-Z_-]+)/correspondences/last)",
                  guarded([this](const httplib::Request& req, httplib::Response& res) {
                    const std::size_t count = store.remove_last_correspondence(req.matches[1]);
                    const SessionState s = store.snapshot(req.matches[1]);
                    send_json(res, 200, ordered_json{{"count", count}, {"rebuild", rebuild_json(s.rebuild)}});
                  }));

    server.Get(R"(/sessions/([0-9a-zA-Z_-]+)/map)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string dir = req.has_param("dir") ? req.get_param_value("dir") : "fwd";
      if (dir != "fwd" && dir != "inv") throw ServiceError(400, "bad_request", "dir must be fwd or inv");
      const Point2 p{query_number(req, "x"), query_number(req, "y")};
      const auto q = store.query(req.matches[1], dir == "fwd" ? Direction::Forward : Direction::Inverse, p);
      if (!q) {
        send_json(res, 200, ordered_json{{"outside", true}});
      } else {
        send_json(res, 200, ordered_json{{"outside", false}, {"x", q->x}, {"y", q->y}});
      }
    }));

    server.Post(R"(/sessions/([0-9a-zA-Z_-]+)/regions)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      Region r;
      r.label = body.value("label", std::string());
      const auto it = body.find("polygon");
      if (it == body.end() || !it->is_array()) throw ServiceError(400, "bad_request", "missing 'polygon'");
      for (const json& p : *it) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
          throw ServiceError(400, "bad_request", "polygon vertices must be [x, y]");
        }
        r.polygon.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      const std::size_t index = store.add_region(req.matches[1], std::move(r));
      send_json(res, 201, ordered_json{{"index", index}});
    }));

    server.Get(R"(/sessions/([0-9a-zA-Z_-]+)/regions)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const SessionState s = store.snapshot(req.matches[1]);
      const auto mapped = store.mapped_regions(req.matches[1]);
      ordered_json out = ordered_json::array();
      for (std::size_t i = 0; i < s.regions.size() && i < mapped.size(); ++i) {
        ordered_json poly = ordered_json::array();
        for (const Point2& p : s.regions[i].polygon) poly.push_back({p.x, p.y});
        ordered_json entry{{"label", s.regions[i].label}, {"polygon", poly}};
        if (mapped[i]) {
          ordered_json m = ordered_json::array();
          for (const Point2& p : *mapped[i]) m.push_back({p.x, p.y});
          entry["mapped"] = m;
        } else {
          entry["mapped"] = nullptr;
        }
        out.push_back(entry);
      }
      send_json(res, 200, ordered_json{{"regions", out}});
    }));

    server.Get(R"(/sessions/([0-9a-zA-Z_-]+)/export/nogo)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const GridFiles files = store.export_nogo(req.matches[1]);
                 const std::string stem = store.export_name(req.matches[1]);
                 const Bytes tar = make_tar({{stem + ".pgm", files.pgm},
                                             {stem + ".yaml", Bytes(files.yaml.begin(), files.yaml.end())}});
                 res.status = 200;
                 res.set_header("Content-Disposition", "attachment; filename=\"" + stem + "_nogo.tar\"");
                 res.set_content(std::string(tar.begin(), tar.end()), "application/x-tar");
               }));

    server.Post(R"(/sessions/([0-9a-zA-Z_-]+)/pose)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const Pose2D pose{{number_field(body, "x"), number_field(body, "y")}, number_field(body, "theta"), Frame::Grid};
      store.push_pose(req.matches[1], pose);
      send_json(res, 200, ordered_json{{"ok", true}});
    }));

    server.Get(R"(/sessions/([0-9a-zA-Z_-]+)/pose)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, pose_json(store.plan_pose(req.matches[1])));
    }));

    server.Get(R"(/sessions/([0-9a-zA-Z_-]+)/overlay\.png)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const Bytes png = store.overlay_png(req.matches[1]);
                 res.status = 200;
                 res.set_content(std::string(png.begin(), png.end()), "image/png");
               }));

    if (config.static_dir) server.set_mount_point("/ui", config.static_dir->string());
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  impl_->store.restore();
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  if (impl_->config.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->config.host);
  } else if (impl_->server.bind_to_port(impl_->config.host, impl_->config.port)) {
    impl_->port = impl_->config.port;
  }
  if (impl_->port < 0) {
    throw IoError("cannot bind " + impl_->config.host + ":" + std::to_string(impl_->config.port));
  }
  return impl_->port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool Service::running() const { return impl_->server.is_running(); }

SessionStore& Service::store() { return impl_->store; }

}  // namespace planwarp::service
