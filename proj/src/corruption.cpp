#include "localseg/corruption.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "localseg/dataset.hpp"
#include "localseg/image_io.hpp"
#include "localseg/masks.hpp"
#include "localseg/morphology.hpp"

namespace localseg {
namespace {

struct SuperpixelStats {
  std::int64_t size = 0;
  std::int64_t gt = 0;
  std::int64_t sim = 0;
  std::int64_t band = 0;
  bool touches = false;
};

BinaryMask dilate_square(const BinaryMask& m) {
  BinaryMask out(m.size(), 0);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m(x, y)) continue;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (out.in_bounds(x + dx, y + dy)) out(x + dx, y + dy) = 1;
        }
      }
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(DefectType t) {
  switch (t) {
    case DefectType::boundary: return "boundary";
    case DefectType::external: return "external";
    case DefectType::internal: return "internal";
  }
  return "?";
}

void DefectConfig::validate() const {
  double sum = 0;
  for (double p : error_probs) {
    if (p < 0) throw std::invalid_argument("error probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("error probabilities must sum to 1");
  if (!(min_iou > 0 && min_iou < max_iou && max_iou <= 1)) {
    throw std::invalid_argument("need 0 < min_iou < max_iou <= 1");
  }
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
}

DefectType draw_defect_type(Rng& rng, const std::array<double, 3>& probs) {
  return static_cast<DefectType>(rng.weighted(probs));
}

std::optional<BinaryMask> apply_defect(DefectType type, const Superpixels& sp, const BinaryMask& sim,
                                       const BinaryMask& gt, Rng& rng) {
  require_same_size(sp.labels.size(), gt.size(), "superpixels vs gt");
  require_same_size(sim.size(), gt.size(), "sim vs gt");

  std::vector<SuperpixelStats> stats(static_cast<std::size_t>(sp.count) + 1);
  BinaryMask band;
  BinaryMask reach;
  if (type == DefectType::boundary) band = boundary_band(gt, kDefectBandRadius);
  if (type == DefectType::external) {
    BinaryMask both(gt.size());
    for (std::size_t i = 0; i < both.pixel_count(); ++i) both.values()[i] = sim.values()[i] | gt.values()[i];
    reach = dilate_square(both);
  }
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    auto& s = stats[static_cast<std::size_t>(sp.labels.values()[i])];
    ++s.size;
    s.gt += gt.values()[i];
    s.sim += sim.values()[i];
    if (!band.empty()) s.band += band.values()[i];
    if (!reach.empty() && reach.values()[i]) s.touches = true;
  }

  std::vector<int> eligible;
  for (int id = 1; id <= sp.count; ++id) {
    const auto& s = stats[static_cast<std::size_t>(id)];
    if (s.size == 0) continue;
    bool ok = false;
    switch (type) {
      case DefectType::boundary: ok = s.band > 0; break;
      case DefectType::external: ok = s.gt == 0 && s.touches && s.sim < s.size; break;
      case DefectType::internal: ok = s.gt == s.size && s.sim > 0; break;
    }
    if (ok) eligible.push_back(id);
  }
  if (eligible.empty()) return std::nullopt;
  const int pick = eligible[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(eligible.size()) - 1))];

  BinaryMask out = sim;
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    if (sp.labels.values()[i] != pick) continue;
    auto& v = out.values()[i];
    switch (type) {
      case DefectType::boundary: v = v ? 0 : 1; break;
      case DefectType::external: v = 1; break;
      case DefectType::internal: v = 0; break;
    }
  }
  return out;
}

const Superpixels& SuperpixelCache::get(int k) {
  auto it = cache_.find(k);
  if (it == cache_.end()) {
    it = cache_.emplace(k, slic(image_, SlicConfig{k, compactness_, iterations_})).first;
  }
  return it->second;
}

DefectResult simulate_defective_mask(const Image& image, const BinaryMask& gt, const DefectConfig& cfg) {
  SuperpixelCache cache(image, cfg.compactness, cfg.slic_iterations);
  return simulate_defective_mask(cache, gt, cfg);
}

DefectResult simulate_defective_mask(SuperpixelCache& cache, const BinaryMask& gt, const DefectConfig& cfg) {
  cfg.validate();
  if (count_true(gt) < kMinMaskPixels) {
    throw std::invalid_argument("ground truth needs at least " + std::to_string(kMinMaskPixels) + " pixels");
  }
  Rng rng(cfg.seed);
  DefectResult r;
  r.mask = gt;
  while (r.attempts < cfg.max_attempts) {
    ++r.attempts;
    const DefectType drawn = draw_defect_type(rng, cfg.error_probs);
    const int k = kSlicPixelCounts[static_cast<std::size_t>(rng.uniform_int(0, kSlicPixelCounts.size() - 1))];
    const Superpixels& sp = cache.get(k);

    std::array<double, 3> probs = cfg.error_probs;
    DefectType type = drawn;
    std::optional<BinaryMask> next = apply_defect(type, sp, r.mask, gt, rng);
    while (!next) {
      probs[static_cast<std::size_t>(type)] = 0;
      if (probs[0] + probs[1] + probs[2] <= 0) break;
      spdlog::debug("corruption: no {} superpixel at K={}, redrawing type", to_string(type), k);
      type = draw_defect_type(rng, probs);
      next = apply_defect(type, sp, r.mask, gt, rng);
    }
    if (!next) continue;

    r.mask = std::move(*next);
    r.iou = iou(r.mask, gt);
    r.steps.push_back({type, k, r.iou});
    if (r.iou >= cfg.min_iou && r.iou < cfg.max_iou) return r;
    if (r.iou < cfg.min_iou) {
      r.mask = gt;
      r.iou = 1.0;
      r.steps.clear();
      ++r.resets;
    }
  }
  throw CorruptionFailed("no mask in IOU band [" + std::to_string(cfg.min_iou) + ", " +
                         std::to_string(cfg.max_iou) + ") after " + std::to_string(cfg.max_attempts) +
                         " attempts");
}

std::uint64_t sample_seed(std::uint64_t seed, std::string_view id) {
  return hash_combine(seed, fnv1a(id));
}

BenchmarkSummary build_benchmark(const std::filesystem::path& dataset, const std::filesystem::path& out,
                                 const DefectConfig& cfg, unsigned threads) {
  namespace fs = std::filesystem;
  using nlohmann::json;
  cfg.validate();
  const auto refs = list_dataset(dataset);
  fs::create_directories(out / "init_masks");
  const bool copy_inputs = fs::weakly_canonical(dataset) != fs::weakly_canonical(out);

  std::vector<json> entries(refs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < refs.size(); i = next++) {
      const auto& ref = refs[i];
      json& e = entries[i];
      e["id"] = ref.id;
      try {
        auto sample = load_sample(ref, false);
        if (!sample) {
          e["status"] = "skipped";
          continue;
        }
        DefectConfig local = cfg;
        local.seed = sample_seed(cfg.seed, ref.id);
        const DefectResult r = simulate_defective_mask(sample->image, sample->gt, local);
        write_mask_png(out / "init_masks" / (ref.id + ".png"), r.mask);
        if (copy_inputs) {
          fs::create_directories(out / "images");
          fs::create_directories(out / "masks");
          fs::copy_file(ref.image, out / "images" / ref.image.filename(), fs::copy_options::overwrite_existing);
          fs::copy_file(ref.mask, out / "masks" / ref.mask.filename(), fs::copy_options::overwrite_existing);
        }
        json steps = json::array();
        for (const auto& s : r.steps) {
          steps.push_back({{"type", to_string(s.type)}, {"k", s.slic_k}, {"iou", s.iou_after}});
        }
        e["status"] = "ok";
        e["iou"] = r.iou;
        e["attempts"] = r.attempts;
        e["resets"] = r.resets;
        e["defects"] = std::move(steps);
      } catch (const std::exception& ex) {
        spdlog::warn("corrupt: {}: {}", ref.id, ex.what());
        e["status"] = "failed";
        e["error"] = ex.what();
      }
    }
  };
  threads = std::max(1u, threads);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BenchmarkSummary summary;
  json samples = json::array();
  json failures = json::array();
  json skipped = json::array();
  for (auto& e : entries) {
    const std::string status = e["status"];
    if (status == "ok") {
      ++summary.written;
      e.erase("status");
      samples.push_back(std::move(e));
    } else if (status == "failed") {
      ++summary.failed;
      failures.push_back({{"id", e["id"]}, {"error", e["error"]}});
    } else {
      ++summary.skipped;
      skipped.push_back(e["id"]);
    }
  }
  const json manifest{{"seed", cfg.seed},
                      {"min_iou", cfg.min_iou},
                      {"max_iou", cfg.max_iou},
                      {"error_probs", cfg.error_probs},
                      {"max_attempts", cfg.max_attempts},
                      {"compactness", cfg.compactness},
                      {"samples", samples},
                      {"failures", failures},
                      {"skipped", skipped}};
  summary.manifest = out / "manifest.json";
  std::ofstream(summary.manifest) << manifest.dump(2) << '\n';
  return summary;
}

}  // namespace localseg
