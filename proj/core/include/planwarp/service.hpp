#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "planwarp/session_store.hpp"

namespace planwarp::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 7878;  // 0 binds an ephemeral port
  std::optional<std::filesystem::path> data_dir;
  std::size_t max_sessions = 64;
  std::optional<std::filesystem::path> static_dir;  // browser UI assets
};

/// JSON over HTTP front end for a SessionStore.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; returns the bound port. Throws IoError.
  int bind();
  /// Serves until stop(); call bind() first.
  void run();
  void stop();
  bool running() const;

  SessionStore& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace planwarp::service
