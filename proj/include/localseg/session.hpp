#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "localseg/backend.hpp"
#include "localseg/crop.hpp"
#include "localseg/raster.hpp"

namespace localseg {

/// undo() with an empty history.
class NothingToUndo : public Error {
 public:
  NothingToUndo() : Error("nothing to undo") {}
};

inline constexpr int kProgressiveAfterClicks = 10;
inline constexpr std::size_t kHistoryDepth = 32;
inline constexpr int kClickDiskRadius = 2;

struct StageTimings {
  double target_crop_ms = 0;
  double segment_ms = 0;
  double focus_crop_ms = 0;
  double refine_ms = 0;
  double merge_ms = 0;
  double total_ms = 0;
};

struct ClickRecord {
  Click click;
  bool progressive = false;
  CropSpec target;
  CropSpec focus;
  bool focus_fallback = false;  // click was not on the coarse/previous difference
  std::optional<BBox> updated_region;
  StageTimings timings;
  double target_area_ratio = 0;
  double focus_area_ratio = 0;
  bool undone = false;
};

/// One JSON object, no trailing newline.
[[nodiscard]] std::string audit_json(const ClickRecord& r);

struct MergeResult {
  BinaryMask mask;
  std::optional<BBox> updated_region;  // tight box of changed pixels
};

/// Non-progressive: new_pred wins everywhere. Progressive: only the 8-connected
/// xor(prev, new_pred) component holding the click is copied onto prev; if the
/// click touches no component, the nearest one is used.
[[nodiscard]] MergeResult merge_masks(const BinaryMask& prev, const BinaryMask& new_pred,
                                      const Click& click, bool progressive);

/// Tight box of the pixels that differ, or nullopt.
[[nodiscard]] std::optional<BBox> changed_region(const BinaryMask& before, const BinaryMask& after);

/// Single-object interactive session. Not thread-safe; callers serialize writes.
class Session {
 public:
  Session(Image image, std::optional<BinaryMask> initial_mask, ModelSeries series,
          std::shared_ptr<const Backend> backend);

  /// Runs the click pipeline and returns its audit record. Throws
  /// std::out_of_range for a click outside the image.
  const ClickRecord& add_click(Polarity polarity, Point p);
  void undo();
  void set_mask(BinaryMask m);

  [[nodiscard]] const Image& image() const { return image_; }
  [[nodiscard]] const BinaryMask& mask() const { return mask_; }
  [[nodiscard]] const std::vector<Click>& clicks() const { return clicks_; }
  [[nodiscard]] bool had_initial_mask() const { return had_initial_; }
  [[nodiscard]] bool progressive_active() const {
    return had_initial_ || static_cast<int>(clicks_.size()) > kProgressiveAfterClicks;
  }
  [[nodiscard]] const std::vector<ClickRecord>& audit() const { return audit_; }
  [[nodiscard]] std::size_t history_depth() const { return history_.size(); }
  [[nodiscard]] const ModelSeries& series() const { return series_; }
  [[nodiscard]] const Backend& backend() const { return *backend_; }

  /// Crop areas of every click that has not been undone.
  [[nodiscard]] std::vector<CropAreaSample> crop_area_samples() const;
  void write_audit(std::ostream& out) const;

 private:
  struct Snapshot {
    BinaryMask mask;
    std::size_t clicks = 0;
    bool had_initial = false;
    std::optional<std::size_t> audit_index;
  };

  void push_history(std::optional<std::size_t> audit_index);

  Image image_;
  BinaryMask mask_;
  ModelSeries series_;
  std::shared_ptr<const Backend> backend_;
  std::vector<Click> clicks_;
  bool had_initial_ = false;
  std::vector<ClickRecord> audit_;
  std::deque<Snapshot> history_;
};

}  // namespace localseg
