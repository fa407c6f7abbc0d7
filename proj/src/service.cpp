#include "localseg/service.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "localseg/image_io.hpp"
#include "localseg/masks.hpp"
#include "localseg/session.hpp"

namespace localseg {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct SessionEntry {
  SessionEntry(std::string id_, Session s, std::optional<BinaryMask> gt_, std::string backend_)
      : id(std::move(id_)), session(std::move(s)), gt(std::move(gt_)), backend(std::move(backend_)),
        created_at(std::chrono::system_clock::now()) {}

  std::string id;
  std::mutex mu;
  Session session;
  std::optional<BinaryMask> gt;
  std::string backend;
  std::chrono::system_clock::time_point created_at;
  std::atomic<Clock::rep> last_used{Clock::now().time_since_epoch().count()};

  void touch() { last_used = Clock::now().time_since_epoch().count(); }
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

json box_json(const std::optional<BBox>& b) {
  if (!b) return nullptr;
  return {b->x0, b->y0, b->x1, b->y1};
}

}  // namespace

struct Service::Impl {
  ServiceConfig cfg;
  httplib::Server server;
  mutable std::shared_mutex store_mu;
  std::map<std::string, std::shared_ptr<SessionEntry>> sessions;
  std::mutex id_mu;
  std::mt19937_64 id_rng{std::random_device{}()};
  std::uint64_t id_counter = 0;
  std::mutex external_mu;
  std::shared_ptr<const Backend> external;
  std::mutex log_mu;

  explicit Impl(ServiceConfig c) : cfg(std::move(c)) {
    ModelSeries::parse(cfg.series);
    routes();
  }

  std::string new_id() {
    std::lock_guard lock(id_mu);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%016llx%08llx", static_cast<unsigned long long>(id_rng()),
                  static_cast<unsigned long long>(++id_counter));
    return buf;
  }

  std::shared_ptr<SessionEntry> find(const std::string& id) {
    std::shared_lock lock(store_mu);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  std::shared_ptr<const Backend> external_backend() {
    std::lock_guard lock(external_mu);
    if (!external) {
      if (cfg.model_path.empty()) throw std::invalid_argument("backend 'external' needs --model");
      BackendOptions opts;
      opts.model_path = cfg.model_path;
      opts.io_spec_path = cfg.io_spec_path;
      opts.series = ModelSeries::parse(cfg.series);
      external = make_backend("external", opts);
    }
    return external;
  }

  std::size_t evict_idle() {
    const auto cutoff = (Clock::now() - cfg.session_ttl).time_since_epoch().count();
    std::unique_lock lock(store_mu);
    std::size_t n = 0;
    for (auto it = sessions.begin(); it != sessions.end();) {
      if (it->second->last_used.load() < cutoff) {
        it = sessions.erase(it);
        ++n;
      } else {
        ++it;
      }
    }
    if (n) spdlog::info("evicted {} idle session(s)", n);
    return n;
  }

  void log_request(const httplib::Request& req, const httplib::Response& res) {
    if (!cfg.request_log) return;
    const json line{{"ts", std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::system_clock::now().time_since_epoch())
                               .count()},
                    {"method", req.method},
                    {"path", req.path},
                    {"status", res.status},
                    {"remote", req.remote_addr},
                    {"bytes", res.body.size()}};
    std::lock_guard lock(log_mu);
    *cfg.request_log << line.dump() << '\n';
    cfg.request_log->flush();
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    evict_idle();
    if (!req.is_multipart_form_data() || !req.has_file("image")) {
      return send_error(res, 400, "multipart field 'image' is required");
    }
    ModelSeries series;
    try {
      series = ModelSeries::parse(req.has_param("series") ? req.get_param_value("series") : cfg.series);
    } catch (const std::invalid_argument& e) {
      return send_json(res, 400, json{{"error", e.what()}, {"allowed", {"s1", "s2"}}});
    }
    const std::string backend_name = req.has_param("backend") ? req.get_param_value("backend") : cfg.backend;

    Image image;
    std::optional<BinaryMask> init;
    std::optional<BinaryMask> gt;
    try {
      const auto& f = req.get_file_value("image").content;
      image = decode_image({reinterpret_cast<const std::uint8_t*>(f.data()), f.size()});
    } catch (const DecodeError& e) {
      return send_error(res, 400, std::string("image: ") + e.what());
    }
    for (const char* field : {"init_mask", "gt"}) {
      if (!req.has_file(field)) continue;
      const auto& f = req.get_file_value(field).content;
      BinaryMask m;
      try {
        m = decode_mask({reinterpret_cast<const std::uint8_t*>(f.data()), f.size()});
      } catch (const DecodeError& e) {
        return send_error(res, 400, std::string(field) + ": " + e.what());
      }
      if (!(m.size() == image.size())) {
        return send_json(res, 400, json{{"error", std::string(field) + " dimensions do not match image"},
                                        {"image", {image.width(), image.height()}},
                                        {field, {m.width(), m.height()}}});
      }
      (std::string_view(field) == "gt" ? gt : init) = std::move(m);
    }

    std::shared_ptr<const Backend> backend;
    try {
      if (backend_name == "external") {
        backend = external_backend();
      } else {
        BackendOptions opts;
        opts.gt = gt;
        opts.noise = cfg.noise;
        opts.series = series;
        backend = make_backend(backend_name, opts);
      }
    } catch (const UnknownBackend& e) {
      return send_error(res, 404, e.what());
    } catch (const std::invalid_argument& e) {
      return send_error(res, 400, e.what());
    } catch (const BackendError& e) {
      return send_error(res, 500, e.what());
    }

    const std::string id = new_id();
    auto entry = std::make_shared<SessionEntry>(id, Session(std::move(image), std::move(init), series, backend),
                                                std::move(gt), backend_name);
    const Size size = entry->session.image().size();
    {
      std::unique_lock lock(store_mu);
      sessions.emplace(id, entry);
    }
    send_json(res, 201,
              json{{"id", id},
                   {"width", size.width},
                   {"height", size.height},
                   {"series", series.label()},
                   {"backend", backend_name},
                   {"progressive", entry->session.progressive_active()}});
  }

  // Runs fn under the session's lock, or answers 404.
  template <typename Fn>
  void with_session(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
    auto entry = find(req.matches[1]);
    if (!entry) return send_error(res, 404, "no such session");
    std::lock_guard lock(entry->mu);
    entry->touch();
    fn(*entry);
  }

  void add_click(const httplib::Request& req, httplib::Response& res) {
    json body;
    int x = 0;
    int y = 0;
    Polarity polarity = Polarity::positive;
    try {
      body = json::parse(req.body);
      x = body.at("x").get<int>();
      y = body.at("y").get<int>();
      polarity = parse_polarity(body.value("polarity", "positive"));
    } catch (const std::exception& e) {
      return send_error(res, 400, std::string("expected {\"x\", \"y\", \"polarity\"}: ") + e.what());
    }
    with_session(req, res, [&](SessionEntry& e) {
      if (!e.session.image().in_bounds(x, y)) {
        return send_json(res, 422, json{{"error", "click outside image"},
                                        {"width", e.session.image().width()},
                                        {"height", e.session.image().height()}});
      }
      try {
        const ClickRecord& r = e.session.add_click(polarity, {x, y});
        json out{{"mask_url", "/sessions/" + e.id + "/mask"},
                 {"updated_region", box_json(r.updated_region)},
                 {"ordinal", r.click.ordinal},
                 {"progressive", r.progressive},
                 {"timings", {{"target_crop_ms", r.timings.target_crop_ms},
                              {"segment_ms", r.timings.segment_ms},
                              {"focus_crop_ms", r.timings.focus_crop_ms},
                              {"refine_ms", r.timings.refine_ms},
                              {"merge_ms", r.timings.merge_ms},
                              {"total_ms", r.timings.total_ms}}}};
        if (e.gt) out["iou"] = iou(e.session.mask(), *e.gt);
        send_json(res, 200, out);
      } catch (const BackendError& ex) {
        send_error(res, 500, std::string("backend: ") + ex.what());
      }
    });
  }

  void get_mask(const httplib::Request& req, httplib::Response& res) {
    BinaryMask snapshot;
    auto entry = find(req.matches[1]);
    if (!entry) return send_error(res, 404, "no such session");
    {
      std::lock_guard lock(entry->mu);
      entry->touch();
      snapshot = entry->session.mask();
    }
    const Bytes png = encode_mask_png(snapshot);
    res.status = 200;
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }

  void put_mask(const httplib::Request& req, httplib::Response& res) {
    BinaryMask m;
    try {
      m = decode_mask({reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()});
    } catch (const DecodeError& e) {
      return send_error(res, 400, e.what());
    }
    with_session(req, res, [&](SessionEntry& e) {
      if (!(m.size() == e.session.image().size())) {
        return send_json(res, 400, json{{"error", "mask dimensions do not match image"},
                                        {"image", {e.session.image().width(), e.session.image().height()}},
                                        {"mask", {m.width(), m.height()}}});
      }
      e.session.set_mask(std::move(m));
      json out{{"progressive", e.session.progressive_active()}};
      if (e.gt) out["iou"] = iou(e.session.mask(), *e.gt);
      send_json(res, 200, out);
    });
  }

  void undo(const httplib::Request& req, httplib::Response& res) {
    with_session(req, res, [&](SessionEntry& e) {
      try {
        e.session.undo();
      } catch (const NothingToUndo& ex) {
        return send_error(res, 409, ex.what());
      }
      json out{{"clicks", e.session.clicks().size()}, {"progressive", e.session.progressive_active()}};
      if (e.gt) out["iou"] = iou(e.session.mask(), *e.gt);
      send_json(res, 200, out);
    });
  }

  void audit(const httplib::Request& req, httplib::Response& res) {
    with_session(req, res, [&](SessionEntry& e) {
      std::ostringstream out;
      e.session.write_audit(out);
      res.status = 200;
      res.set_content(out.str(), "application/x-ndjson");
    });
  }

  void routes() {
    server.Post("/sessions", [this](const auto& req, auto& res) { create_session(req, res); });
    server.Post(R"(/sessions/([^/]+)/clicks)", [this](const auto& req, auto& res) { add_click(req, res); });
    server.Get(R"(/sessions/([^/]+)/mask)", [this](const auto& req, auto& res) { get_mask(req, res); });
    server.Put(R"(/sessions/([^/]+)/mask)", [this](const auto& req, auto& res) { put_mask(req, res); });
    server.Post(R"(/sessions/([^/]+)/undo)", [this](const auto& req, auto& res) { undo(req, res); });
    server.Get(R"(/sessions/([^/]+)/audit)", [this](const auto& req, auto& res) { audit(req, res); });
    server.Delete(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::unique_lock lock(store_mu);
      if (sessions.erase(req.matches[1]) == 0) return send_error(res, 404, "no such session");
      res.status = 204;
    });
    server.Get("/health", [this](const auto&, auto& res) {
      std::shared_lock lock(store_mu);
      send_json(res, 200, json{{"status", "ok"}, {"sessions", sessions.size()}});
    });
    server.set_exception_handler([](const auto&, auto& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        spdlog::error("request failed: {}", e.what());
        send_error(res, 500, e.what());
      } catch (...) {
        send_error(res, 500, "unknown error");
      }
    });
    server.set_logger([this](const auto& req, const auto& res) { log_request(req, res); });
  }
};

Service::Service(ServiceConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}
Service::~Service() { stop(); }

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }
int Service::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }
void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }
void Service::stop() {
  if (impl_) impl_->server.stop();
}

std::size_t Service::session_count() const {
  std::shared_lock lock(impl_->store_mu);
  return impl_->sessions.size();
}

std::size_t Service::evict_idle() { return impl_->evict_idle(); }

}  // namespace localseg
