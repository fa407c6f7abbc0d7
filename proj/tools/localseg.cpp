// Command-line entry point: eval, corrupt, serve, synth.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "localseg/corruption.hpp"
#include "localseg/eval.hpp"
#include "localseg/kernels.hpp"
#include "localseg/rng.hpp"
#include "localseg/service.hpp"
#include "localseg/synthetic.hpp"

namespace {

using namespace localseg;

std::vector<double> parse_targets(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stod(tok));
  return out;
}

Service* g_service = nullptr;

void handle_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local-update interactive segmentation toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // eval
  auto* eval = app.add_subcommand("eval", "Run the click-simulation protocol over a dataset");
  std::string dataset, mode = "scratch", series = "s2", backend = "oracle", model, targets = "0.85,0.90,0.95";
  std::string report_path, csv_path;
  int max_clicks = 20, min_clicks = 0;
  std::uint64_t seed = 0;
  double noise_radius = 2.0, blob_rate = 0.2;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  eval->add_option("--dataset", dataset, "Dataset root")->required();
  eval->add_option("--mode", mode, "scratch | init")->check(CLI::IsMember({"scratch", "init"}));
  eval->add_option("--series", series, "s1 | s2");
  eval->add_option("--backend", backend, "oracle | noisy | constant | external");
  eval->add_option("--model", model, "Exported segmentor (external backend)");
  eval->add_option("--targets", targets, "Comma-separated target IOUs");
  eval->add_option("--max-clicks", max_clicks);
  eval->add_option("--min-clicks", min_clicks, "Keep clicking until this many clicks");
  eval->add_option("--seed", seed);
  eval->add_option("--noise-radius", noise_radius, "noisy backend boundary amplitude (px)");
  eval->add_option("--blob-rate", blob_rate, "noisy backend spurious blob probability");
  eval->add_option("--threads", threads);
  eval->add_option("--report", report_path, "JSON report path");
  eval->add_option("--csv", csv_path, "Per-sample CSV path");

  // corrupt
  auto* corrupt = app.add_subcommand("corrupt", "Generate defective initial masks");
  std::string out_root;
  DefectConfig dcfg;
  corrupt->add_option("--dataset", dataset, "Dataset root")->required();
  corrupt->add_option("--out", out_root, "Output root (defaults to the dataset root)");
  corrupt->add_option("--seed", dcfg.seed);
  corrupt->add_option("--min-iou", dcfg.min_iou);
  corrupt->add_option("--max-iou", dcfg.max_iou);
  corrupt->add_option("--max-attempts", dcfg.max_attempts);
  corrupt->add_option("--compactness", dcfg.compactness);
  corrupt->add_option("--threads", threads);

  // serve
  auto* serve = app.add_subcommand("serve", "Start the HTTP session service");
  std::string host = "127.0.0.1", config_path;
  int port = 8080;
  bool no_request_log = false;
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--backend", backend, "Default backend");
  serve->add_option("--model", model, "Exported segmentor (external backend)");
  serve->add_option("--series", series, "Default series");
  serve->add_option("--config", config_path, "JSON config file; keys mirror the flags");
  serve->add_flag("--no-request-log", no_request_log, "Disable JSON-lines request logging on stdout");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  int count = 50;
  SceneConfig scene;
  synth->add_option("--out", out_root, "Output root")->required();
  synth->add_option("--count", count);
  synth->add_option("--seed", seed);
  synth->add_option("--width", scene.size.width);
  synth->add_option("--height", scene.size.height);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_default_logger(spdlog::default_logger()->clone("localseg"));
  spdlog::debug("kernels: {}", kernels::isa_name(kernels::active_isa()));

  try {
    if (*eval) {
      EvalConfig cfg;
      cfg.target_ious = parse_targets(targets);
      cfg.max_clicks = max_clicks;
      cfg.min_clicks = min_clicks;
      cfg.mode = parse_eval_mode(mode);
      cfg.seed = seed;
      const ModelSeries ms = ModelSeries::parse(series);
      std::shared_ptr<const Backend> shared;
      if (!backend_needs_ground_truth(backend)) {
        BackendOptions opts;
        opts.model_path = model;
        opts.series = ms;
        shared = make_backend(backend, opts);
      }
      BackendFactory factory = [&](const std::string& id, const BinaryMask& gt) {
        if (shared) return shared;
        BackendOptions opts;
        opts.gt = gt;
        opts.noise = {noise_radius, blob_rate, sample_seed(seed, id)};
        return make_backend(backend, opts);
      };
      Report report = evaluate_dataset(dataset, factory, ms, cfg, threads);
      report.backend = backend;
      for (const auto& t : report.thresholds) {
        std::cout << "NoC@" << t.target << " = " << t.noc << "  NoF@" << t.target << " = " << t.nof << '\n';
      }
      std::cout << "samples: " << report.records.size() << '\n';
      if (!report_path.empty()) std::ofstream(report_path) << report_json(report) << '\n';
      if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        write_report_csv(csv, report);
      }
    } else if (*corrupt) {
      if (out_root.empty()) out_root = dataset;
      const auto summary = build_benchmark(dataset, out_root, dcfg, threads);
      std::cout << "written " << summary.written << ", failed " << summary.failed << ", skipped "
                << summary.skipped << "; manifest " << summary.manifest.string() << '\n';
      return summary.failed == 0 ? 0 : 2;
    } else if (*serve) {
      ServiceConfig cfg;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open config " + config_path);
        const auto j = nlohmann::json::parse(in);
        host = j.value("host", host);
        port = j.value("port", port);
        backend = j.value("backend", backend);
        series = j.value("series", series);
        model = j.value("/backend/model_path"_json_pointer, model);
        if (j.contains("session_ttl_seconds")) cfg.session_ttl = std::chrono::seconds(j["session_ttl_seconds"]);
      }
      // Flags given explicitly on the command line override the file.
      if (serve->count("--backend")) backend = serve->get_option("--backend")->as<std::string>();
      if (serve->count("--series")) series = serve->get_option("--series")->as<std::string>();
      if (serve->count("--model")) model = serve->get_option("--model")->as<std::string>();
      if (serve->count("--port")) port = serve->get_option("--port")->as<int>();
      cfg.backend = backend;
      cfg.series = series;
      cfg.model_path = model;
      cfg.request_log = no_request_log ? nullptr : &std::cout;
      Service service(cfg);
      g_service = &service;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      spdlog::info("listening on {}:{} (backend {}, series {})", host, port, backend, series);
      if (!service.listen(host, port)) {
        spdlog::error("cannot listen on {}:{}", host, port);
        return 1;
      }
    } else if (*synth) {
      write_synthetic_dataset(out_root, count, scene, seed);
      std::cout << "wrote " << count << " scenes to " << out_root << '\n';
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
