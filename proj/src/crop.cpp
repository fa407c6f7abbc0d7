#include "localseg/crop.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "localseg/components.hpp"
#include "localseg/masks.hpp"

namespace localseg {
namespace {

constexpr double kSnap = 1e-9;

CropSpec make_spec(const RectF& r, const BBox& bounds, Size out, double ratio) {
  BBox box = to_pixel_box(clamp_to(r, bounds)).intersect(bounds);
  return {box, out, ratio};
}

RectF expanded(const BBox& b, double ratio) {
  return enforce_min_side(scale_about_center(RectF::of(b), ratio), kMinCropSide);
}

}  // namespace

RectF scale_about_center(const RectF& r, double ratio) {
  const double cx = 0.5 * (r.x0 + r.x1);
  const double cy = 0.5 * (r.y0 + r.y1);
  const double hw = 0.5 * r.width() * ratio;
  const double hh = 0.5 * r.height() * ratio;
  return {cx - hw, cy - hh, cx + hw, cy + hh};
}

RectF enforce_min_side(const RectF& r, double min_side) {
  RectF out = r;
  if (r.width() < min_side) {
    const double cx = 0.5 * (r.x0 + r.x1);
    out.x0 = cx - 0.5 * min_side;
    out.x1 = cx + 0.5 * min_side;
  }
  if (r.height() < min_side) {
    const double cy = 0.5 * (r.y0 + r.y1);
    out.y0 = cy - 0.5 * min_side;
    out.y1 = cy + 0.5 * min_side;
  }
  return out;
}

RectF clamp_to(const RectF& r, const BBox& bounds) {
  return {std::clamp(r.x0, double(bounds.x0), double(bounds.x1)),
          std::clamp(r.y0, double(bounds.y0), double(bounds.y1)),
          std::clamp(r.x1, double(bounds.x0), double(bounds.x1)),
          std::clamp(r.y1, double(bounds.y0), double(bounds.y1))};
}

BBox to_pixel_box(const RectF& r) {
  auto lo = [](double v) { return static_cast<int>(std::floor(v + kSnap)); };
  auto hi = [](double v) { return static_cast<int>(std::ceil(v - kSnap)); };
  return {lo(r.x0), lo(r.y0), hi(r.x1), hi(r.y1)};
}

BBox expand_box(const BBox& b, double ratio, const BBox& bounds) {
  if (ratio < 1.0) throw std::invalid_argument("expand ratio must be >= 1");
  return to_pixel_box(clamp_to(scale_about_center(RectF::of(b), ratio), bounds));
}

ModelSeries ModelSeries::parse(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "s1") return s1();
  if (lower == "s2") return s2();
  throw std::invalid_argument("unknown model series '" + std::string(name) +
                              "' (expected one of: s1, s2)");
}

CropSpec target_crop(const BinaryMask& prev, const Click& click, const ModelSeries& series,
                     double ratio) {
  if (!prev.in_bounds(click.point())) {
    throw std::out_of_range("click outside image");
  }
  const BBox bounds = prev.bounds();
  const auto mask_box = mask_bbox(prev);
  if (!mask_box) return {bounds, series.segmentor_input, ratio};
  const BBox external = mask_box->unite(BBox::of(click.point()));
  return make_spec(expanded(external, ratio), bounds, series.segmentor_input, ratio);
}

std::optional<CropSpec> focus_crop(const BinaryMask& coarse, const BinaryMask& prev,
                                   const Click& click, const ModelSeries& series, double ratio) {
  require_same_size(coarse.size(), prev.size(), "focus_crop");
  const BinaryMask diff = xor_diff(coarse, prev);
  if (!diff(click.point())) return std::nullopt;
  const auto comps = connected_components(diff, Connectivity::eight);
  const auto id = component_containing(comps.labels, click.point());
  if (!id) return std::nullopt;
  const BBox box = component_boxes(comps.labels, comps.count)[static_cast<std::size_t>(*id)];
  return make_spec(expanded(box, ratio), prev.bounds(), series.refiner_input, ratio);
}

CropSpec fallback_focus_crop(Point click, Size image, const ModelSeries& series) {
  const double side =
      std::max(kMinCropSide, kFallbackFocusFraction * std::max(image.width, image.height));
  const double cx = click.x + 0.5;
  const double cy = click.y + 0.5;
  const RectF r{cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2};
  return make_spec(r, BBox::of(image), series.refiner_input, 1.0);
}

BinaryMask crop_resize(const BinaryMask& src, const CropSpec& spec) {
  return resample_region(src, spec.box, spec.out);
}

ScalarMap crop_resize(const ScalarMap& src, const CropSpec& spec) {
  return resample_region(src, spec.box, spec.out);
}

RgbPlanes crop_resize(const Image& src, const CropSpec& spec) {
  return resample_region(src, spec.box, spec.out);
}

ScalarMap roi_align(const ScalarMap& feature, const RectF& box, Size out) {
  if (out.width < 1 || out.height < 1) throw std::invalid_argument("roi_align output must be >= 1x1");
  ScalarMap dst(out);
  const double bin_w = box.width() / out.width;
  const double bin_h = box.height() / out.height;
  const int w = feature.width();
  const int h = feature.height();
  for (int j = 0; j < out.height; ++j) {
    double y = box.y0 + (j + 0.5) * bin_h - 0.5;
    y = std::clamp(y, 0.0, double(h - 1));
    const int y0 = static_cast<int>(std::floor(y));
    const int y1 = std::min(y0 + 1, h - 1);
    const auto ty = static_cast<float>(y - y0);
    const auto r0 = feature.row(y0);
    const auto r1 = feature.row(y1);
    auto drow = dst.row(j);
    for (int i = 0; i < out.width; ++i) {
      double x = box.x0 + (i + 0.5) * bin_w - 0.5;
      x = std::clamp(x, 0.0, double(w - 1));
      const int x0 = static_cast<int>(std::floor(x));
      const int x1 = std::min(x0 + 1, w - 1);
      const auto tx = static_cast<float>(x - x0);
      const float top = r0[x0] + (r0[x1] - r0[x0]) * tx;
      const float bottom = r1[x0] + (r1[x1] - r1[x0]) * tx;
      drow[i] = top + (bottom - top) * ty;
    }
  }
  return dst;
}

ScalarStack roi_align(const ScalarStack& feature, const RectF& box, Size out) {
  ScalarStack result;
  result.reserve(feature.size());
  for (const auto& ch : feature) result.push_back(roi_align(ch, box, out));
  return result;
}

BBox paste_back(const BinaryMask& local, const CropSpec& spec, BinaryMask& canvas) {
  require_same_size(local.size(), spec.out, "paste_back");
  if (!canvas.bounds().contains(spec.box)) {
    throw std::out_of_range("paste_back: box " + spec.box.str() + " outside canvas " + canvas.size().str());
  }
  const BinaryMask patch = resize(local, spec.box.size());
  for (int y = 0; y < patch.height(); ++y) {
    std::copy(patch.row(y).begin(), patch.row(y).end(), canvas.row(spec.box.y0 + y).begin() + spec.box.x0);
  }
  return spec.box;
}

BBox paste_back(const ScalarMap& local, const CropSpec& spec, ScalarMap& canvas) {
  require_same_size(local.size(), spec.out, "paste_back");
  if (!canvas.bounds().contains(spec.box)) {
    throw std::out_of_range("paste_back: box " + spec.box.str() + " outside canvas " + canvas.size().str());
  }
  const ScalarMap patch = resize(local, spec.box.size());
  for (int y = 0; y < patch.height(); ++y) {
    std::copy(patch.row(y).begin(), patch.row(y).end(), canvas.row(spec.box.y0 + y).begin() + spec.box.x0);
  }
  return spec.box;
}

double area_ratio(const BBox& box, Size image) {
  return static_cast<double>(box.area()) / static_cast<double>(image.area());
}

CropAreaStats crop_area_stats(std::span<const CropAreaSample> samples) {
  if (samples.empty()) throw std::invalid_argument("crop_area_stats needs at least one click");
  CropAreaStats s;
  for (const auto& x : samples) {
    s.mean_target_ratio += x.target_ratio;
    s.mean_focus_ratio += x.focus_ratio;
  }
  s.samples = samples.size();
  s.mean_target_ratio /= static_cast<double>(s.samples);
  s.mean_focus_ratio /= static_cast<double>(s.samples);
  return s;
}

}  // namespace localseg
