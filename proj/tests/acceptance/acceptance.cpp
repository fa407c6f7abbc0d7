// Runs every acceptance criterion once and prints one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "localseg/backend.hpp"
#include "localseg/components.hpp"
#include "localseg/corruption.hpp"
#include "localseg/eval.hpp"
#include "localseg/image_io.hpp"
#include "localseg/kernels.hpp"
#include "localseg/masks.hpp"
#include "localseg/morphology.hpp"
#include "localseg/session.hpp"
#include "localseg/synthetic.hpp"
#include "oracles.hpp"

using namespace localseg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr int kScenes = 50;
constexpr std::uint64_t kSceneSeed = 2024;

const std::vector<Scene>& scenes() {
  static const std::vector<Scene> all = [] {
    std::vector<Scene> v;
    for (int i = 0; i < kScenes; ++i) v.push_back(make_scene({}, kSceneSeed + static_cast<std::uint64_t>(i)));
    return v;
  }();
  return all;
}

std::string scene_id(int i) { return fmt("scene_%03d", i); }

Report evaluate(const std::function<std::shared_ptr<const Backend>(int)>& backend_for,
                const std::function<std::optional<BinaryMask>(int)>& initial_for, const EvalConfig& cfg) {
  std::vector<SampleRecord> records;
  for (int i = 0; i < kScenes; ++i) {
    const Scene& sc = scenes()[static_cast<std::size_t>(i)];
    records.push_back(
        run_sample(scene_id(i), sc.image, sc.gt, initial_for(i), backend_for(i), ModelSeries::s2(), cfg));
  }
  return aggregate(std::move(records), cfg);
}

const ThresholdStats& at(const Report& r, double target) {
  for (const auto& t : r.thresholds) {
    if (std::abs(t.target - target) < 1e-12) return t;
  }
  throw std::logic_error("threshold missing");
}

// Fusion identities on random maps, both kernel paths.
Outcome fusion_identities() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-10.0f, 10.0f);
  double worst = 0;
  std::vector<kernels::Isa> isas{kernels::Isa::scalar};
  if (kernels::isa_supported(kernels::Isa::avx2)) isas.push_back(kernels::Isa::avx2);
  const kernels::Isa original = kernels::active_isa();
  for (auto isa : isas) {
    kernels::force_isa(isa);
    for (int trial = 0; trial < 1000; ++trial) {
      ScalarMap d(64, 64), l(64, 64);
      for (auto& v : d.values()) v = u(rng);
      for (auto& v : l.values()) v = u(rng);
      const ScalarMap hi = fuse(ScalarMap(64, 64, 20.0f), d, l);
      const ScalarMap lo = fuse(ScalarMap(64, 64, -20.0f), d, l);
      const ScalarMap mid = fuse(ScalarMap(64, 64, 0.0f), d, l);
      for (std::size_t i = 0; i < d.values().size(); ++i) {
        const double dv = d.values()[i], lv = l.values()[i];
        worst = std::max({worst, std::abs(hi.values()[i] - dv), std::abs(lo.values()[i] - lv),
                          std::abs(mid.values()[i] - 0.5 * (dv + lv))});
      }
    }
  }
  kernels::force_isa(original);
  return {worst <= 1e-6, fmt("max |error| %.3g over 1000 trials x %zu kernel paths", worst, isas.size())};
}

Outcome raster_oracles() {
  std::size_t mismatches = 0;
  for (int bits = 0; bits < (1 << 16); ++bits) {
    BinaryMask m(4, 4);
    for (int i = 0; i < 16; ++i) m.values()[static_cast<std::size_t>(i)] = (bits >> i) & 1;
    for (bool eight : {false, true}) {
      int n = 0;
      const LabelMap want = oracle::flood_fill_labels(m, eight, &n);
      const Components got = connected_components(m, eight ? Connectivity::eight : Connectivity::four);
      if (got.count != n || !(got.labels == want)) ++mismatches;
    }
  }
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const BinaryMask m = oracle::random_mask(32, 32, 0.3 + 0.4 * (i % 3) / 2.0, rng);
    for (bool eight : {false, true}) {
      int n = 0;
      const LabelMap want = oracle::flood_fill_labels(m, eight, &n);
      const Components got = connected_components(m, eight ? Connectivity::eight : Connectivity::four);
      if (got.count != n || !(got.labels == want)) ++mismatches;
    }
  }
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const BinaryMask m = oracle::random_mask(16, 16, 0.7, rng);
    const ScalarMap want = oracle::brute_distance(m);
    const ScalarMap got = distance_transform(m);
    for (std::size_t p = 0; p < m.values().size(); ++p) {
      worst = std::max(worst, std::abs(double(got.values()[p]) - double(want.values()[p])));
    }
  }
  return {mismatches == 0 && worst <= 1e-6,
          fmt("%zu labeling mismatches over 133072 cases, distance max |error| %.3g on 200 masks", mismatches,
              worst)};
}

// A perturbed starting mask so progressive merge is on from the first click.
BinaryMask rough_initial(const BinaryMask& gt, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 2);
  BinaryMask m = pick(rng) == 0 ? erode(gt, 3) : dilate(gt, 2 + pick(rng));
  std::uniform_int_distribution<int> px(0, gt.width() - 12), py(0, gt.height() - 12);
  for (int b = 0, n = pick(rng) + 1; b < n; ++b) {
    const int x0 = px(rng), y0 = py(rng);
    const std::uint8_t v = static_cast<std::uint8_t>(pick(rng) != 0);
    for (int y = y0; y < y0 + 10; ++y) {
      for (int x = x0; x < x0 + 10; ++x) m(x, y) = v;
    }
  }
  return m;
}

Outcome progressive_locality() {
  std::mt19937_64 rng(3);
  const SceneConfig small{{160, 120}, 1000, 4000, 2};
  std::size_t clicks = 0, violations = 0, changed = 0;
  for (int s = 0; s < 500; ++s) {
    const Scene sc = make_scene(small, 10'000 + static_cast<std::uint64_t>(s));
    NoiseConfig nc;
    nc.seed = static_cast<std::uint64_t>(s);
    auto backend = std::make_shared<NoisyOracleBackend>(sc.gt, nc);
    Session sess(sc.image, rough_initial(sc.gt, rng), ModelSeries::s1(), backend);
    std::uniform_int_distribution<int> px(0, 159), py(0, 119);
    for (int k = 0; k < 4; ++k) {
      Point p;
      Polarity pol;
      if (k % 2 == 0 && sess.mask() != sc.gt) {
        const Click c = simulate_next_click(sess.mask(), sc.gt);
        p = c.point();
        pol = c.polarity;
      } else {
        p = {px(rng), py(rng)};
        pol = sc.gt(p) ? Polarity::positive : Polarity::negative;
      }
      const BinaryMask before = sess.mask();
      const ClickRecord& r = sess.add_click(pol, p);
      ++clicks;
      if (!r.progressive) ++violations;
      for (int y = 0; y < before.height(); ++y) {
        for (int x = 0; x < before.width(); ++x) {
          const bool inside = r.updated_region && r.updated_region->contains(Point{x, y});
          if (before(x, y) != sess.mask()(x, y)) {
            ++changed;
            if (!inside) ++violations;
          }
        }
      }
    }
  }
  return {violations == 0 && changed > 0,
          fmt("%zu pixels outside the updated region changed over 500 sessions / %zu clicks (%zu pixels updated)",
              violations, clicks, changed)};
}

Report oracle_run() {
  EvalConfig cfg;
  cfg.min_clicks = 3;
  return evaluate([](int i) { return std::make_shared<OracleBackend>(scenes()[static_cast<std::size_t>(i)].gt); },
                  [](int) { return std::nullopt; }, cfg);
}

Outcome oracle_end_to_end(const Report& r) {
  const auto& t = at(r, 0.90);
  return {t.noc <= 2.0 && t.nof == 0, fmt("NoC@0.90 = %.2f, NoF@0.90 = %d on %d scenes", t.noc, t.nof, kScenes)};
}

Outcome crop_instrumentation(const Report& r) {
  std::vector<CropAreaSample> all;
  for (const auto& rec : r.records) all.insert(all.end(), rec.crop_areas.begin(), rec.crop_areas.end());
  const CropAreaStats s = crop_area_stats(all);
  return {s.mean_focus_ratio < s.mean_target_ratio && s.mean_target_ratio < 1.0,
          fmt("mean focus ratio %.3f < mean target ratio %.3f < 1 over %zu clicks", s.mean_focus_ratio,
              s.mean_target_ratio, s.samples)};
}

Outcome mask_correction() {
  DefectConfig dcfg;
  dcfg.seed = 77;
  std::vector<BinaryMask> initial;
  for (int i = 0; i < kScenes; ++i) {
    const Scene& sc = scenes()[static_cast<std::size_t>(i)];
    DefectConfig local = dcfg;
    local.seed = sample_seed(dcfg.seed, scene_id(i));
    initial.push_back(simulate_defective_mask(sc.image, sc.gt, local).mask);
  }
  auto noisy = [](int i) {
    NoiseConfig nc;
    nc.boundary_radius = 2.0;
    nc.blob_rate = 0.2;
    nc.seed = static_cast<std::uint64_t>(i);
    return std::make_shared<NoisyOracleBackend>(scenes()[static_cast<std::size_t>(i)].gt, nc);
  };
  EvalConfig scratch_cfg;
  const Report scratch = evaluate(noisy, [](int) { return std::nullopt; }, scratch_cfg);
  EvalConfig init_cfg;
  init_cfg.mode = EvalMode::from_initial_mask;
  const Report init =
      evaluate(noisy, [&](int i) { return std::optional<BinaryMask>(initial[static_cast<std::size_t>(i)]); }, init_cfg);

  int kept = 0;
  for (const auto& rec : init.records) {
    if (!rec.iou_trace.empty() && rec.iou_trace[0] >= rec.initial_iou - 0.01) ++kept;
  }
  const double a = at(init, 0.90).noc, b = at(scratch, 0.90).noc;
  const double share = double(kept) / kScenes;
  return {a < b && share >= 0.95,
          fmt("NoC@0.90 init %.2f vs scratch %.2f; click-1 no-regression on %.0f%% of samples", a, b, 100 * share)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome corruption_band() {
  int violations = 0, failures = 0;
  for (int i = 0; i < 200; ++i) {
    const Scene sc = make_scene({}, 50'000 + static_cast<std::uint64_t>(i));
    DefectConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(i);
    try {
      const DefectResult r = simulate_defective_mask(sc.image, sc.gt, cfg);
      const double v = oracle::brute_iou(r.mask, sc.gt);
      if (!(v >= 0.75 && v < 0.85)) ++violations;
    } catch (const CorruptionFailed&) {
      ++failures;
    }
  }

  Rng rng(5);
  std::array<int, 3> n{};
  const std::array<double, 3> probs{0.65, 0.25, 0.10};
  for (int i = 0; i < 1000; ++i) ++n[static_cast<std::size_t>(draw_defect_type(rng, probs))];
  double freq_err = 0;
  for (std::size_t t = 0; t < 3; ++t) freq_err = std::max(freq_err, std::abs(n[t] / 1000.0 - probs[t]));

  const fs::path root = fs::temp_directory_path() / "localseg_acceptance_corrupt";
  fs::remove_all(root);
  write_synthetic_dataset(root / "data", 12, {}, 31);
  DefectConfig cfg;
  cfg.seed = 9;
  (void)build_benchmark(root / "data", root / "a", cfg, 1);
  (void)build_benchmark(root / "data", root / "b", cfg, 1);
  bool identical = slurp(root / "a" / "manifest.json") == slurp(root / "b" / "manifest.json");
  int files = 0;
  for (const auto& e : fs::directory_iterator(root / "a" / "init_masks")) {
    ++files;
    identical = identical && slurp(e.path()) == slurp(root / "b" / "init_masks" / e.path().filename());
  }
  fs::remove_all(root);

  return {violations == 0 && failures == 0 && freq_err <= 0.10 && identical && files == 12,
          fmt("200 masks: %d out of band, %d failed; type frequencies (%.3f, %.3f, %.3f); regeneration %s (%d files)",
              violations, failures, n[0] / 1000.0, n[1] / 1000.0, n[2] / 1000.0,
              identical ? "byte-identical" : "DIFFERS", files)};
}

Outcome protocol_sanity(const Report& oracle) {
  const Report empty = evaluate([](int) { return std::make_shared<ConstantBackend>(); },
                                [](int) { return std::nullopt; }, EvalConfig{});
  bool ok = true;
  std::string detail = "constant:";
  for (const auto& t : empty.thresholds) {
    ok = ok && t.noc == 20.0 && t.nof == kScenes;
    detail += fmt(" NoC@%.2f=%.2f NoF=%d", t.target, t.noc, t.nof);
  }
  const auto& t85 = at(oracle, 0.85);
  ok = ok && t85.noc == 1.0 && t85.nof == 0;
  detail += fmt("; ground truth: NoC@0.85=%.2f NoF=%d (N=%d)", t85.noc, t85.nof, kScenes);
  return {ok, detail};
}

Outcome click_placement() {
  std::mt19937_64 rng(8);
  int wrong = 0;
  for (int i = 0; i < 200; ++i) {
    const int w = 20 + i % 17, h = 18 + i % 11;
    BinaryMask gt = oracle::disk_mask({w, h}, w / 2.0, h / 2.0, 4 + i % 6);
    BinaryMask pred = oracle::random_mask(w, h, 0.15, rng);
    for (std::size_t p = 0; p < pred.values().size(); ++p) pred.values()[p] ^= gt.values()[p];
    if (pred == gt) pred(0, 0) ^= 1;

    BinaryMask err(gt.size());
    for (std::size_t p = 0; p < err.values().size(); ++p) err.values()[p] = pred.values()[p] != gt.values()[p];
    int n = 0;
    const LabelMap labels = oracle::flood_fill_labels(err, true, &n);
    std::vector<int> sizes(static_cast<std::size_t>(n) + 1);
    for (int v : labels.values()) ++sizes[static_cast<std::size_t>(v)];
    int best = 1;
    for (int l = 2; l <= n; ++l) {
      if (sizes[static_cast<std::size_t>(l)] > sizes[static_cast<std::size_t>(best)]) best = l;
    }
    BinaryMask region(gt.size());
    for (std::size_t p = 0; p < region.values().size(); ++p) region.values()[p] = labels.values()[p] == best;
    const ScalarMap d = oracle::brute_distance(region);
    Point want{-1, -1};
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (region(x, y) && (want.x < 0 || d(x, y) > d(want.x, want.y))) want = {x, y};
      }
    }
    const Click c = simulate_next_click(pred, gt);
    const bool polarity_ok = c.positive() == bool(gt(c.x, c.y));
    if (!region(c.x, c.y) || c.point() != want || !polarity_ok) ++wrong;
  }
  return {wrong == 0, fmt("%d of 200 clicks off the brute-force argmax of the largest error region", wrong)};
}

}  // namespace

int main() {
  int failed = 0;
  auto run = [&](const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s  %-28s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  run("fusion-identities", [] {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = fusion_identities();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s >= 5.0) o = {false, o.detail + fmt(", took %.1fs (limit 5s)", s)};
    return o;
  });
  run("raster-oracles", [] {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = raster_oracles();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s >= 60.0) o = {false, o.detail + fmt(", took %.1fs (limit 60s)", s)};
    return o;
  });
  run("progressive-locality", progressive_locality);

  Report oracle;
  run("oracle-end-to-end", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    oracle = oracle_run();
    Outcome o = oracle_end_to_end(oracle);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s >= 120.0) o = {false, o.detail + fmt(", took %.1fs (limit 120s)", s)};
    return o;
  });
  run("mask-correction-advantage", mask_correction);
  run("corruption-band", [] {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = corruption_band();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s >= 180.0) o = {false, o.detail + fmt(", took %.1fs (limit 180s)", s)};
    return o;
  });
  run("evaluation-protocol", [&] {
    if (oracle.records.empty()) return Outcome{false, "oracle run unavailable"};
    return protocol_sanity(oracle);
  });
  run("click-placement", click_placement);
  run("crop-instrumentation", [&] {
    if (oracle.records.empty()) return Outcome{false, "oracle run unavailable"};
    return crop_instrumentation(oracle);
  });

  std::printf("%d criteria failed\n", failed);
  return failed;
}
