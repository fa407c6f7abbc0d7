#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "localseg/crop.hpp"
#include "localseg/raster.hpp"
#include "localseg/sampling.hpp"

namespace localseg {

/// A backend failed or produced tensors that break the contract.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// Backend name not recognised by make_backend.
class UnknownBackend : public Error {
 public:
  using Error::Error;
};

inline constexpr float kOracleLogit = 10.0f;
inline constexpr int kOracleFeatureStride = 4;
inline constexpr int kBoundaryTargetFactor = 8;

/// Everything at segmentor resolution. `crop` is the source geometry; learned
/// backends ignore it, oracle backends use it to look up ground truth.
struct SegmentorInput {
  CropSpec crop;
  RgbPlanes image;
  ScalarMap prev_mask;
  ScalarMap pos_clicks;
  ScalarMap neg_clicks;
};

struct CoarseOutput {
  ScalarMap logits;     // M_l
  ScalarStack feature;  // C channels at a stride that divides the input size
};

/// Everything at refiner resolution.
struct RefinerInput {
  CropSpec crop;
  RgbPlanes image;
  ScalarMap pos_clicks;
  ScalarMap neg_clicks;
  ScalarStack roi_feature;
  ScalarMap roi_logits;  // M_l resampled into the focus crop
};

struct RefineOutput {
  ScalarMap detail;    // M_d
  ScalarMap boundary;  // M_b
};

/// Segmentor + refiner pair. Implementations are immutable after
/// construction and must be safe to call concurrently.
class Backend {
 public:
  virtual ~Backend() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual CoarseOutput segment(const SegmentorInput& in) const = 0;
  [[nodiscard]] virtual RefineOutput refine(const RefinerInput& in) const = 0;
};

void validate_input(const SegmentorInput& in);
void validate_output(const CoarseOutput& out, Size input);
void validate_input(const RefinerInput& in);
void validate_output(const RefineOutput& out, Size input);

/// M_r = sigmoid(M_b) * M_d + (1 - sigmoid(M_b)) * M_l, element-wise.
[[nodiscard]] ScalarMap fuse(const ScalarMap& boundary, const ScalarMap& detail,
                             const ScalarMap& coarse);

/// Pixels that change under a nearest-neighbour round trip through 1/factor
/// resolution (output size ceil(dim / factor)).
[[nodiscard]] BinaryMask boundary_target(const BinaryMask& gt, int factor = kBoundaryTargetFactor);

/// Stride-4 average pool of (logits, image mean, positive clicks, negative clicks).
[[nodiscard]] ScalarStack oracle_feature(const ScalarMap& logits, const RgbPlanes& image,
                                         const ScalarMap& pos, const ScalarMap& neg);

/// Emits +10 on ground-truth pixels and -10 elsewhere, in whatever crop it is given.
class OracleBackend final : public Backend {
 public:
  explicit OracleBackend(BinaryMask gt);
  [[nodiscard]] std::string name() const override { return "oracle"; }
  [[nodiscard]] CoarseOutput segment(const SegmentorInput& in) const override;
  [[nodiscard]] RefineOutput refine(const RefinerInput& in) const override;

 private:
  BinaryMask gt_;
};

struct NoiseConfig {
  /// Amplitude of the boundary displacement field, in network-input pixels.
  double boundary_radius = 2.0;
  /// Probability that a segment() call adds one spurious blob.
  double blob_rate = 0.2;
  std::uint64_t seed = 0;
};

/// Oracle whose boundaries wander by up to `boundary_radius` pixels along a
/// smooth random field, plus occasional false-positive blobs. Noise is a pure
/// function of (seed, crop geometry, input tensors), so calls are reentrant
/// and reproducible.
class NoisyOracleBackend final : public Backend {
 public:
  NoisyOracleBackend(BinaryMask gt, NoiseConfig cfg);
  [[nodiscard]] std::string name() const override { return "noisy"; }
  [[nodiscard]] CoarseOutput segment(const SegmentorInput& in) const override;
  [[nodiscard]] RefineOutput refine(const RefinerInput& in) const override;
  [[nodiscard]] const NoiseConfig& config() const { return cfg_; }

 private:
  BinaryMask gt_;
  NoiseConfig cfg_;
};

/// Fills every logit with one value; the refiner gate stays closed.
class ConstantBackend final : public Backend {
 public:
  explicit ConstantBackend(float logit = -kOracleLogit) : logit_(logit) {}
  [[nodiscard]] std::string name() const override { return "constant"; }
  [[nodiscard]] CoarseOutput segment(const SegmentorInput& in) const override;
  [[nodiscard]] RefineOutput refine(const RefinerInput& in) const override;

 private:
  float logit_;
};

struct BackendOptions {
  std::optional<BinaryMask> gt;  // required by oracle / noisy
  NoiseConfig noise;
  std::filesystem::path model_path;    // external
  std::filesystem::path io_spec_path;  // external; defaults to <model>.json
  ModelSeries series = ModelSeries::s2();
};

/// "oracle", "noisy", "constant"/"empty", or "external".
[[nodiscard]] std::shared_ptr<const Backend> make_backend(std::string_view name,
                                                          const BackendOptions& opts);
[[nodiscard]] bool backend_needs_ground_truth(std::string_view name);

}  // namespace localseg
