#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "localseg/backend.hpp"
#include "localseg/crop.hpp"
#include "localseg/raster.hpp"

namespace localseg {

enum class EvalMode { from_scratch, from_initial_mask };

[[nodiscard]] std::string_view to_string(EvalMode m);
/// "scratch" or "init".
[[nodiscard]] EvalMode parse_eval_mode(std::string_view s);

struct EvalConfig {
  std::vector<double> target_ious{0.85, 0.90, 0.95};
  int max_clicks = 20;
  /// Keep clicking until at least this many clicks even after the targets
  /// are met. 0 stops as soon as the highest target is reached.
  int min_clicks = 0;
  EvalMode mode = EvalMode::from_scratch;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument for targets outside (0, 1] or max_clicks < 1.
  void validate() const;
};

/// Center of the largest 8-connected error region: the distance-transform
/// argmax inside it, ties to the lowest row-major index. Positive when the
/// region is missed foreground. Throws if pred equals gt.
[[nodiscard]] Click simulate_next_click(const BinaryMask& pred, const BinaryMask& gt);

struct SampleRecord {
  std::string id;
  double initial_iou = 0;
  std::vector<double> iou_trace;       // after each click
  std::vector<int> clicks_to_target;   // per target; max_clicks + 1 when failed
  std::vector<bool> failed;            // per target
  std::vector<CropAreaSample> crop_areas;
  std::optional<std::string> error;    // backend failure
};

[[nodiscard]] SampleRecord run_sample(const std::string& id, const Image& image, const BinaryMask& gt,
                                      const std::optional<BinaryMask>& initial,
                                      std::shared_ptr<const Backend> backend, const ModelSeries& series,
                                      const EvalConfig& cfg);

struct ThresholdStats {
  double target = 0;
  std::int64_t clicks_sum = 0;  // failures count as max_clicks
  std::int64_t samples = 0;
  double noc = 0;               // clicks_sum / samples rounded to 2 decimals
  int nof = 0;
};

struct Report {
  EvalConfig config;
  std::string backend;
  std::string series;
  std::vector<ThresholdStats> thresholds;
  std::vector<double> mean_iou_at_click;  // index k-1; samples that stopped carry their last IOU
  std::vector<SampleRecord> records;      // sorted by id
};

/// Throws std::invalid_argument on an empty record set.
[[nodiscard]] Report aggregate(std::vector<SampleRecord> records, const EvalConfig& cfg);

/// round(numerator / denominator, 2 decimals), half away from zero, exact in integers.
[[nodiscard]] double round_ratio_2dp(std::int64_t numerator, std::int64_t denominator);

[[nodiscard]] std::string report_json(const Report& r);
void write_report_csv(std::ostream& out, const Report& r);

/// Builds the backend for one sample. Oracle-style backends need the sample's gt.
using BackendFactory =
    std::function<std::shared_ptr<const Backend>(const std::string& id, const BinaryMask& gt)>;

/// Evaluates every loadable sample of a dataset, `threads` at a time.
[[nodiscard]] Report evaluate_dataset(const std::filesystem::path& root, const BackendFactory& factory,
                                      const ModelSeries& series, const EvalConfig& cfg,
                                      unsigned threads = 1);

}  // namespace localseg
