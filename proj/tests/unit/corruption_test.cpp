#include <doctest.h>

#include <filesystem>
#include <algorithm>
#include <fstream>
#include <set>

#include "json.hpp"
#include "localseg/corruption.hpp"
#include "localseg/image_io.hpp"
#include "localseg/masks.hpp"
#include "localseg/morphology.hpp"
#include "localseg/synthetic.hpp"
#include "oracles.hpp"

using namespace localseg;
namespace fs = std::filesystem;

namespace {

Superpixels grid_superpixels(Size s, int cell) {
  Superpixels sp{LabelMap(s), 0};
  const int nx = (s.width + cell - 1) / cell;
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) sp.labels(x, y) = (y / cell) * nx + x / cell + 1;
  }
  sp.count = nx * ((s.height + cell - 1) / cell);
  return sp;
}

// The labels whose pixels changed, and whether every changed label changed entirely.
std::set<int> changed_labels(const BinaryMask& a, const BinaryMask& b, const Superpixels& sp, bool* whole) {
  std::set<int> labels;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    if (a.values()[i] != b.values()[i]) labels.insert(sp.labels.values()[i]);
  }
  *whole = true;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    if (labels.count(sp.labels.values()[i]) && a.values()[i] == b.values()[i]) *whole = false;
  }
  return labels;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("boundary band") {
  CHECK(count_true(boundary_band(BinaryMask(9, 9), 3)) == 0);

  const BinaryMask block = oracle::rect_mask({9, 9}, {2, 2, 7, 7});
  const BinaryMask band = boundary_band(block, 1);
  const BinaryMask d = oracle::brute_morph(block, 1, true);
  const BinaryMask e = oracle::brute_morph(block, 1, false);
  for (std::size_t i = 0; i < band.values().size(); ++i) {
    REQUIRE(band.values()[i] == (d.values()[i] && !e.values()[i]));
  }
  CHECK(count_true(band) == 16 + 20);

  const BinaryMask full(12, 10, 1);
  const BinaryMask ring = boundary_band(full, 2);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 12; ++x) {
      const bool edge = x < 2 || y < 2 || x >= 10 || y >= 8;
      REQUIRE(ring(x, y) == edge);
    }
  }
}

TEST_CASE("internal defect punches one whole superpixel") {
  const Size s{30, 30};
  const Superpixels sp = grid_superpixels(s, 10);
  const BinaryMask gt(s, 1);
  Rng rng(1);
  const auto out = apply_defect(DefectType::internal, sp, gt, gt, rng);
  REQUIRE(out);
  bool whole = false;
  const auto labels = changed_labels(gt, *out, sp, &whole);
  CHECK(labels.size() == 1);
  CHECK(whole);
  CHECK(count_true(*out) == 800);

  CHECK_FALSE(apply_defect(DefectType::internal, sp, BinaryMask(s), gt, rng));
}

TEST_CASE("external defect grows next to the object and never overlaps it") {
  const Size s{60, 60};
  const Superpixels sp = grid_superpixels(s, 6);
  const BinaryMask gt = oracle::rect_mask(s, {24, 24, 36, 36});
  const BinaryMask grown = oracle::brute_morph(gt, 1, true);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto out = apply_defect(DefectType::external, sp, gt, gt, rng);
    REQUIRE(out);
    bool whole = false;
    const auto labels = changed_labels(gt, *out, sp, &whole);
    REQUIRE(labels.size() == 1);
    REQUIRE(whole);
    bool touches = false;
    for (std::size_t p = 0; p < gt.values().size(); ++p) {
      if (out->values()[p] && !gt.values()[p]) {
        REQUIRE(gt.values()[p] == 0);
        // 8-neighbour contact: the 3x3 square dilation
        const int x = static_cast<int>(p % 60), y = static_cast<int>(p / 60);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (gt.in_bounds({x + dx, y + dy}) && gt(x + dx, y + dy)) touches = true;
          }
        }
      }
      REQUIRE((gt.values()[p] <= out->values()[p]));
    }
    CHECK(touches);
    (void)grown;
  }
}

TEST_CASE("boundary defect flips a superpixel on the band") {
  const Size s{60, 60};
  const Superpixels sp = grid_superpixels(s, 7);
  const BinaryMask gt = oracle::disk_mask(s, 30, 30, 14);
  const BinaryMask band = boundary_band(gt, kDefectBandRadius);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto out = apply_defect(DefectType::boundary, sp, gt, gt, rng);
    REQUIRE(out);
    bool whole = false;
    const auto labels = changed_labels(gt, *out, sp, &whole);
    REQUIRE(labels.size() == 1);
    CHECK(whole);
    bool on_band = false;
    for (std::size_t p = 0; p < gt.values().size(); ++p) {
      if (sp.labels.values()[p] == *labels.begin() && band.values()[p]) on_band = true;
    }
    CHECK(on_band);
    CHECK(iou(*out, gt) < 1.0);
  }
}

TEST_CASE("defect type frequencies") {
  Rng rng(7);
  std::array<int, 3> n{};
  const std::array<double, 3> probs{0.65, 0.25, 0.10};
  for (int i = 0; i < 1000; ++i) ++n[static_cast<std::size_t>(draw_defect_type(rng, probs))];
  for (std::size_t t = 0; t < 3; ++t) CHECK(std::abs(n[t] / 1000.0 - probs[t]) <= 0.1);
}

TEST_CASE("config validation") {
  DefectConfig c;
  CHECK_NOTHROW(c.validate());
  c.error_probs = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.min_iou = 0.9;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("defective masks land in the band and are reproducible") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Scene sc = make_scene({{160, 120}, 1500, 5000, 1}, seed);
    DefectConfig cfg;
    cfg.seed = seed;
    const DefectResult r = simulate_defective_mask(sc.image, sc.gt, cfg);
    const double v = oracle::brute_iou(r.mask, sc.gt);
    CHECK(v >= 0.75);
    CHECK(v < 0.85);
    CHECK(r.iou == doctest::Approx(v));
    CHECK_FALSE(r.steps.empty());
    CHECK(r.attempts <= cfg.max_attempts);
    for (const auto& st : r.steps) {
      CHECK(std::find(kSlicPixelCounts.begin(), kSlicPixelCounts.end(), st.slic_k) != kSlicPixelCounts.end());
    }
    CHECK(simulate_defective_mask(sc.image, sc.gt, cfg).mask == r.mask);
  }
}

TEST_CASE("an unreachable band exhausts the attempt budget") {
  const Scene sc = make_scene({{120, 90}, 1000, 3000, 0}, 2);
  DefectConfig cfg;
  cfg.min_iou = 0.8;
  cfg.max_iou = 0.8 + 1e-9;
  cfg.max_attempts = 10;
  CHECK_THROWS_AS((void)simulate_defective_mask(sc.image, sc.gt, cfg), CorruptionFailed);

  BinaryMask speck(120, 90);
  speck(5, 5) = 1;
  CHECK_THROWS_AS((void)simulate_defective_mask(sc.image, speck, DefectConfig{}), std::invalid_argument);
}

TEST_CASE("per-sample seeds") {
  CHECK(sample_seed(1, "a") == sample_seed(1, "a"));
  CHECK(sample_seed(1, "a") != sample_seed(1, "b"));
  CHECK(sample_seed(1, "a") != sample_seed(2, "a"));
}

TEST_CASE("benchmark build") {
  const fs::path data = fs::temp_directory_path() / "localseg_corrupt_src";
  const fs::path out1 = fs::temp_directory_path() / "localseg_corrupt_a";
  const fs::path out2 = fs::temp_directory_path() / "localseg_corrupt_b";
  for (const auto& p : {data, out1, out2}) fs::remove_all(p);
  write_synthetic_dataset(data, 4, {{160, 120}, 1500, 5000, 1}, 11);
  Image small(50, 50);
  write_image_png(data / "images" / "tiny.png", small);
  write_mask_png(data / "masks" / "tiny.png", oracle::rect_mask({50, 50}, {0, 0, 13, 23}));  // 299 px

  DefectConfig cfg;
  cfg.seed = 42;
  const BenchmarkSummary a = build_benchmark(data, out1, cfg, 1);
  const BenchmarkSummary b = build_benchmark(data, out2, cfg, 2);
  CHECK(a.written == 4);
  CHECK(a.skipped == 1);
  CHECK(a.failed == 0);
  CHECK(b.written == 4);

  const auto manifest = nlohmann::json::parse(slurp(a.manifest));
  CHECK(manifest["seed"] == 42);
  REQUIRE(manifest["samples"].size() == 4);
  for (const auto& s : manifest["samples"]) {
    const std::string id = s["id"];
    CHECK(id != "tiny");
    const double v = s["iou"];
    CHECK(v >= 0.75);
    CHECK(v < 0.85);
    CHECK_FALSE(s["defects"].empty());
    const BinaryMask init = read_mask(out1 / "init_masks" / (id + ".png"));
    const BinaryMask gt = read_mask(out1 / "masks" / (id + ".png"));
    CHECK(oracle::brute_iou(init, gt) == doctest::Approx(v));
    CHECK(slurp(out1 / "init_masks" / (id + ".png")) == slurp(out2 / "init_masks" / (id + ".png")));
  }
  CHECK(manifest["skipped"][0] == "tiny");
  CHECK(slurp(a.manifest) == slurp(b.manifest));
  for (const auto& p : {data, out1, out2}) fs::remove_all(p);
}
