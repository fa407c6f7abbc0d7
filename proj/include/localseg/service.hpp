#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <ostream>
#include <string>

#include "localseg/backend.hpp"

namespace localseg {

struct ServiceConfig {
  std::string backend = "oracle";  // default when a request names none
  std::string series = "s2";
  std::filesystem::path model_path;
  std::filesystem::path io_spec_path;
  NoiseConfig noise;
  std::chrono::seconds session_ttl{30 * 60};
  /// JSON-lines request log; nullptr disables it.
  std::ostream* request_log = nullptr;
};

// Routes:
//   POST /sessions?series=s1|s2&backend=NAME   multipart: image, [init_mask], [gt]
//   POST /sessions/{id}/clicks                 {"x", "y", "polarity"}
//   GET  /sessions/{id}/mask                   PNG, values {0, 255}
//   PUT  /sessions/{id}/mask                   PNG body
//   POST /sessions/{id}/undo
//   GET  /sessions/{id}/audit                  JSON lines
//   DELETE /sessions/{id}
//   GET  /health
//
// Sessions live in memory and are dropped after session_ttl without requests.
class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Blocks until stop().
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; pair with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

  [[nodiscard]] std::size_t session_count() const;
  /// Drops sessions idle for longer than the TTL; returns how many.
  std::size_t evict_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace localseg
