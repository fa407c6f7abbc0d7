#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "localseg/raster.hpp"
#include "localseg/rng.hpp"
#include "localseg/slic.hpp"

namespace localseg {

enum class DefectType { boundary, external, internal };

[[nodiscard]] std::string_view to_string(DefectType t);

inline constexpr int kDefectBandRadius = 3;

struct DefectConfig {
  std::array<double, 3> error_probs{0.65, 0.25, 0.10};  // boundary, external, internal
  double min_iou = 0.75;
  double max_iou = 0.85;
  int max_attempts = 50;
  std::uint64_t seed = 0;
  double compactness = 10.0;
  int slic_iterations = 10;

  void validate() const;
};

/// Generation ran out of attempts without landing in the IOU band.
class CorruptionFailed : public Error {
 public:
  using Error::Error;
};

[[nodiscard]] DefectType draw_defect_type(Rng& rng, const std::array<double, 3>& probs);

/// Applies one superpixel-aligned defect to `sim`:
///   boundary: XOR-flip a superpixel that meets boundary_band(gt, 3);
///   external: fill a superpixel disjoint from gt that touches sim ∪ gt (8-neighbourhood);
///   internal: clear a superpixel inside gt that still has true pixels in sim.
/// nullopt when no superpixel qualifies.
[[nodiscard]] std::optional<BinaryMask> apply_defect(DefectType type, const Superpixels& sp,
                                                     const BinaryMask& sim, const BinaryMask& gt,
                                                     Rng& rng);

struct DefectStep {
  DefectType type;
  int slic_k = 0;
  double iou_after = 0;
};

struct DefectResult {
  BinaryMask mask;
  double iou = 0;
  std::vector<DefectStep> steps;  // since the last reset
  int attempts = 0;
  int resets = 0;
};

/// Caches superpixel maps per K for one image; SLIC is deterministic.
class SuperpixelCache {
 public:
  SuperpixelCache(const Image& image, double compactness, int iterations)
      : image_(image), compactness_(compactness), iterations_(iterations) {}
  const Superpixels& get(int k);

 private:
  const Image& image_;
  double compactness_;
  int iterations_;
  std::map<int, Superpixels> cache_;
};

/// Stacks random defects on gt until min_iou <= IOU < max_iou, restarting
/// from gt whenever IOU falls below min_iou. Throws CorruptionFailed after
/// max_attempts defect draws.
[[nodiscard]] DefectResult simulate_defective_mask(const Image& image, const BinaryMask& gt,
                                                   const DefectConfig& cfg);
[[nodiscard]] DefectResult simulate_defective_mask(SuperpixelCache& cache, const BinaryMask& gt,
                                                   const DefectConfig& cfg);

/// Seed for one sample's stream.
[[nodiscard]] std::uint64_t sample_seed(std::uint64_t seed, std::string_view id);

struct BenchmarkSummary {
  std::size_t written = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
  std::filesystem::path manifest;
};

/// Writes <out>/init_masks/<id>.png for every usable sample of a dataset and
/// <out>/manifest.json. When out differs from the dataset root, images and
/// masks are copied so <out> is itself a dataset.
BenchmarkSummary build_benchmark(const std::filesystem::path& dataset, const std::filesystem::path& out,
                                 const DefectConfig& cfg, unsigned threads = 1);

}  // namespace localseg
