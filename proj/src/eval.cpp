#include "localseg/eval.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "localseg/components.hpp"
#include "localseg/dataset.hpp"
#include "localseg/masks.hpp"
#include "localseg/morphology.hpp"
#include "localseg/rng.hpp"
#include "localseg/session.hpp"

namespace localseg {

std::string_view to_string(EvalMode m) {
  return m == EvalMode::from_scratch ? "scratch" : "init";
}

EvalMode parse_eval_mode(std::string_view s) {
  if (s == "scratch" || s == "from_scratch") return EvalMode::from_scratch;
  if (s == "init" || s == "from_initial_mask") return EvalMode::from_initial_mask;
  throw std::invalid_argument("unknown eval mode '" + std::string(s) + "' (expected scratch or init)");
}

void EvalConfig::validate() const {
  if (target_ious.empty()) throw std::invalid_argument("at least one target IOU is required");
  for (double t : target_ious) {
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("target IOU must be in (0, 1]");
  }
  if (!std::is_sorted(target_ious.begin(), target_ious.end())) {
    throw std::invalid_argument("target IOUs must be ascending");
  }
  if (max_clicks < 1) throw std::invalid_argument("max_clicks must be >= 1");
  if (min_clicks < 0 || min_clicks > max_clicks) {
    throw std::invalid_argument("min_clicks must be in [0, max_clicks]");
  }
}

Click simulate_next_click(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_size(pred.size(), gt.size(), "simulate_next_click");
  const BinaryMask error = xor_diff(pred, gt);
  const Components comps = connected_components(error, Connectivity::eight);
  const auto largest = largest_component(comps.labels);
  if (!largest) throw std::invalid_argument("simulate_next_click: prediction already equals ground truth");
  const BinaryMask region = component_mask(comps.labels, *largest);
  const ScalarMap dt = distance_transform(region);

  Point best{-1, -1};
  float best_d = -1.0f;
  for (int y = 0; y < dt.height(); ++y) {
    auto row = dt.row(y);
    for (int x = 0; x < dt.width(); ++x) {
      if (region(x, y) && row[x] > best_d) {
        best_d = row[x];
        best = {x, y};
      }
    }
  }
  return {gt(best) ? Polarity::positive : Polarity::negative, best.x, best.y, 0};
}

SampleRecord run_sample(const std::string& id, const Image& image, const BinaryMask& gt,
                        const std::optional<BinaryMask>& initial, std::shared_ptr<const Backend> backend,
                        const ModelSeries& series, const EvalConfig& cfg) {
  cfg.validate();
  if (count_true(gt) == 0) throw std::invalid_argument("run_sample: empty ground truth for " + id);
  require_same_size(gt.size(), image.size(), "ground truth vs image");
  const std::size_t nt = cfg.target_ious.size();
  const int sentinel = cfg.max_clicks + 1;

  SampleRecord rec;
  rec.id = id;
  rec.clicks_to_target.assign(nt, sentinel);
  rec.failed.assign(nt, true);

  std::optional<BinaryMask> start;
  if (cfg.mode == EvalMode::from_initial_mask) {
    if (!initial) {
      rec.error = "no initial mask for sample";
      rec.initial_iou = 0;
      return rec;
    }
    start = initial;
  }

  try {
    Session session(image, start, series, std::move(backend));
    rec.initial_iou = iou(session.mask(), gt);

    auto record_hits = [&](double value, int clicks) {
      for (std::size_t t = 0; t < nt; ++t) {
        if (rec.failed[t] && value >= cfg.target_ious[t]) {
          rec.failed[t] = false;
          rec.clicks_to_target[t] = clicks;
        }
      }
    };
    record_hits(rec.initial_iou, 0);

    for (int k = 1; k <= cfg.max_clicks; ++k) {
      const bool all_met = !rec.failed.back();
      if (all_met && (k > cfg.min_clicks || cfg.mode == EvalMode::from_initial_mask)) break;
      if (session.mask() == gt) break;
      const Click c = simulate_next_click(session.mask(), gt);
      session.add_click(c.polarity, c.point());
      const double v = iou(session.mask(), gt);
      rec.iou_trace.push_back(v);
      record_hits(v, k);
    }
    rec.crop_areas = session.crop_area_samples();
  } catch (const Error& e) {
    spdlog::error("sample {}: {}", id, e.what());
    rec.error = e.what();
    rec.clicks_to_target.assign(nt, sentinel);
    rec.failed.assign(nt, true);
  }
  return rec;
}

double round_ratio_2dp(std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0) throw std::invalid_argument("denominator must be positive");
  const bool negative = numerator < 0;
  const std::int64_t n = negative ? -numerator : numerator;
  const std::int64_t hundredths = (n * 200 + denominator) / (2 * denominator);
  return (negative ? -1.0 : 1.0) * static_cast<double>(hundredths) / 100.0;
}

Report aggregate(std::vector<SampleRecord> records, const EvalConfig& cfg) {
  if (records.empty()) throw std::invalid_argument("aggregate: no sample records");
  cfg.validate();
  std::sort(records.begin(), records.end(),
            [](const SampleRecord& a, const SampleRecord& b) { return a.id < b.id; });

  Report r;
  r.config = cfg;
  const auto n = static_cast<std::int64_t>(records.size());
  for (std::size_t t = 0; t < cfg.target_ious.size(); ++t) {
    ThresholdStats s;
    s.target = cfg.target_ious[t];
    s.samples = n;
    for (const auto& rec : records) {
      if (rec.failed.at(t)) {
        s.clicks_sum += cfg.max_clicks;
        ++s.nof;
      } else {
        s.clicks_sum += rec.clicks_to_target.at(t);
      }
    }
    s.noc = round_ratio_2dp(s.clicks_sum, n);
    r.thresholds.push_back(s);
  }

  r.mean_iou_at_click.assign(static_cast<std::size_t>(cfg.max_clicks), 0.0);
  for (std::size_t k = 0; k < r.mean_iou_at_click.size(); ++k) {
    double sum = 0;
    for (const auto& rec : records) {
      if (rec.iou_trace.empty()) {
        sum += rec.initial_iou;
      } else {
        sum += rec.iou_trace[std::min(k, rec.iou_trace.size() - 1)];
      }
    }
    r.mean_iou_at_click[k] = sum / static_cast<double>(n);
  }
  r.records = std::move(records);
  return r;
}

std::string report_json(const Report& r) {
  using nlohmann::json;
  json cfg{{"targets", r.config.target_ious},
           {"max_clicks", r.config.max_clicks},
           {"min_clicks", r.config.min_clicks},
           {"mode", to_string(r.config.mode)},
           {"seed", r.config.seed},
           {"backend", r.backend},
           {"series", r.series}};
  json agg = json::array();
  for (const auto& t : r.thresholds) {
    agg.push_back({{"target", t.target},
                   {"noc", t.noc},
                   {"nof", t.nof},
                   {"clicks_sum", t.clicks_sum},
                   {"samples", t.samples}});
  }
  json samples = json::array();
  for (const auto& s : r.records) {
    json j{{"id", s.id},
           {"initial_iou", s.initial_iou},
           {"iou_trace", s.iou_trace},
           {"clicks_to_target", s.clicks_to_target},
           {"failed", s.failed}};
    if (s.error) j["error"] = *s.error;
    samples.push_back(std::move(j));
  }
  return json{{"config", cfg},
              {"aggregate", agg},
              {"mean_iou_at_click", r.mean_iou_at_click},
              {"samples", samples}}
      .dump(2);
}

void write_report_csv(std::ostream& out, const Report& r) {
  out << "id,initial_iou,final_iou,clicks";
  for (double t : r.config.target_ious) out << ",noc@" << t << ",failed@" << t;
  out << ",error\n";
  for (const auto& s : r.records) {
    const double final_iou = s.iou_trace.empty() ? s.initial_iou : s.iou_trace.back();
    out << s.id << ',' << s.initial_iou << ',' << final_iou << ',' << s.iou_trace.size();
    for (std::size_t t = 0; t < r.config.target_ious.size(); ++t) {
      out << ',' << s.clicks_to_target[t] << ',' << (s.failed[t] ? 1 : 0);
    }
    std::string err = s.error.value_or("");
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << ',' << err << '\n';
  }
}

Report evaluate_dataset(const std::filesystem::path& root, const BackendFactory& factory,
                        const ModelSeries& series, const EvalConfig& cfg, unsigned threads) {
  cfg.validate();
  const auto refs = list_dataset(root);
  const bool with_initial = cfg.mode == EvalMode::from_initial_mask;
  std::vector<std::optional<SampleRecord>> slots(refs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < refs.size(); i = next++) {
      try {
        auto sample = load_sample(refs[i], with_initial);
        if (!sample) continue;
        auto backend = factory(sample->id, sample->gt);
        slots[i] = run_sample(sample->id, sample->image, sample->gt, sample->initial, std::move(backend),
                              series, cfg);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  threads = std::max(1u, threads);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<SampleRecord> records;
  for (auto& s : slots) {
    if (s) records.push_back(std::move(*s));
  }
  if (records.empty()) throw Error("dataset " + root.string() + " has no usable samples");
  Report r = aggregate(std::move(records), cfg);
  r.series = std::string(series.label());
  return r;
}

}  // namespace localseg
