#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "localseg/raster.hpp"
#include "localseg/sampling.hpp"

namespace localseg {

inline constexpr double kTargetExpandRatio = 1.4;
inline constexpr double kFocusExpandRatio = 1.4;
/// Boxes narrower than this (source pixels) are padded symmetrically.
inline constexpr double kMinCropSide = 16.0;
/// Side of the fallback focus window as a fraction of max(image dims).
inline constexpr double kFallbackFocusFraction = 0.3;

/// Continuous box; geometry stays here until pixels are extracted.
struct RectF {
  double x0 = 0;
  double y0 = 0;
  double x1 = 0;
  double y1 = 0;

  [[nodiscard]] double width() const { return x1 - x0; }
  [[nodiscard]] double height() const { return y1 - y0; }
  static RectF of(const BBox& b) { return {double(b.x0), double(b.y0), double(b.x1), double(b.y1)}; }
};

[[nodiscard]] RectF scale_about_center(const RectF& r, double ratio);
[[nodiscard]] RectF enforce_min_side(const RectF& r, double min_side);
[[nodiscard]] RectF clamp_to(const RectF& r, const BBox& bounds);
/// floor(x0), floor(y0), ceil(x1), ceil(y1), snapping values within 1e-9 of an integer.
[[nodiscard]] BBox to_pixel_box(const RectF& r);

/// Center-preserving scale by `ratio`, clamped to `bounds`.
[[nodiscard]] BBox expand_box(const BBox& b, double ratio, const BBox& bounds);

enum class SeriesName { s1, s2 };

/// Network input resolutions of one deployment tier.
struct ModelSeries {
  SeriesName name = SeriesName::s2;
  Size segmentor_input{256, 256};
  Size refiner_input{256, 256};

  static ModelSeries s1() { return {SeriesName::s1, {128, 128}, {256, 256}}; }
  static ModelSeries s2() { return {SeriesName::s2, {256, 256}, {256, 256}}; }
  /// Accepts "s1"/"s2" (case-insensitive).
  static ModelSeries parse(std::string_view name);
  [[nodiscard]] std::string_view label() const { return name == SeriesName::s1 ? "s1" : "s2"; }
  friend bool operator==(const ModelSeries&, const ModelSeries&) = default;
};

struct CropSpec {
  BBox box;        // source pixels
  Size out;        // network resolution
  double expand_ratio = 1.0;

  friend bool operator==(const CropSpec&, const CropSpec&) = default;
};

/// Expanded external box of prev ∪ click at segmentor resolution. An empty
/// previous mask selects the whole image.
[[nodiscard]] CropSpec target_crop(const BinaryMask& prev, const Click& click,
                                   const ModelSeries& series,
                                   double ratio = kTargetExpandRatio);

/// Expanded box of the xor(coarse, prev) component (8-connected) that holds
/// the click, at refiner resolution. nullopt when the click is not on the diff.
[[nodiscard]] std::optional<CropSpec> focus_crop(const BinaryMask& coarse, const BinaryMask& prev,
                                                 const Click& click, const ModelSeries& series,
                                                 double ratio = kFocusExpandRatio);

/// Square window of side 0.3 * max(image dims) centered on the click.
[[nodiscard]] CropSpec fallback_focus_crop(Point click, Size image, const ModelSeries& series);

[[nodiscard]] BinaryMask crop_resize(const BinaryMask& src, const CropSpec& spec);
[[nodiscard]] ScalarMap crop_resize(const ScalarMap& src, const CropSpec& spec);
[[nodiscard]] RgbPlanes crop_resize(const Image& src, const CropSpec& spec);

/// RoIAlign with one bilinear sample per bin center (half-pixel aligned).
/// Coordinates outside the map clamp to the edge.
[[nodiscard]] ScalarMap roi_align(const ScalarMap& feature, const RectF& box, Size out);
[[nodiscard]] ScalarStack roi_align(const ScalarStack& feature, const RectF& box, Size out);

/// Resizes `local` back to spec.box and writes it into `canvas`; pixels
/// outside the box are untouched. Returns the written region.
BBox paste_back(const BinaryMask& local, const CropSpec& spec, BinaryMask& canvas);
BBox paste_back(const ScalarMap& local, const CropSpec& spec, ScalarMap& canvas);

struct CropAreaSample {
  double target_ratio = 0;
  double focus_ratio = 0;
};

struct CropAreaStats {
  double mean_target_ratio = 0;
  double mean_focus_ratio = 0;
  std::size_t samples = 0;
};

[[nodiscard]] double area_ratio(const BBox& box, Size image);
/// Arithmetic means over all samples. Throws on an empty span.
[[nodiscard]] CropAreaStats crop_area_stats(std::span<const CropAreaSample> samples);

}  // namespace localseg
