#include "localseg/session.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "localseg/components.hpp"
#include "localseg/masks.hpp"
#include "localseg/morphology.hpp"
#include "localseg/sampling.hpp"

namespace localseg {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Source pixel center mapped into the crop frame, nearest crop pixel.
std::optional<Point> to_crop_frame(Point p, const CropSpec& c) {
  if (!c.box.contains(p)) return std::nullopt;
  const double u = (p.x + 0.5 - c.box.x0) * c.out.width / c.box.width() - 0.5;
  const double v = (p.y + 0.5 - c.box.y0) * c.out.height / c.box.height() - 0.5;
  return Point{static_cast<int>(std::floor(u + 0.5)), static_cast<int>(std::floor(v + 0.5))};
}

std::pair<ScalarMap, ScalarMap> click_maps(const std::vector<Click>& clicks, const CropSpec& c) {
  ScalarMap pos(c.out, 0.0f);
  ScalarMap neg(c.out, 0.0f);
  for (const Click& k : clicks) {
    if (auto q = to_crop_frame(k.point(), c)) stamp_disk(k.positive() ? pos : neg, *q, kClickDiskRadius);
  }
  return {std::move(pos), std::move(neg)};
}

// `inner` (source pixels) expressed in the network frame of `outer`.
RectF in_crop_frame(const BBox& inner, const CropSpec& outer) {
  const double sx = double(outer.out.width) / outer.box.width();
  const double sy = double(outer.out.height) / outer.box.height();
  return {(inner.x0 - outer.box.x0) * sx, (inner.y0 - outer.box.y0) * sy,
          (inner.x1 - outer.box.x0) * sx, (inner.y1 - outer.box.y0) * sy};
}

RectF scaled(const RectF& r, double sx, double sy) {
  return {r.x0 * sx, r.y0 * sy, r.x1 * sx, r.y1 * sy};
}

nlohmann::json box_json(const BBox& b) { return {b.x0, b.y0, b.x1, b.y1}; }

nlohmann::json crop_json(const CropSpec& c) {
  return {{"box", box_json(c.box)}, {"out", {c.out.width, c.out.height}}, {"ratio", c.expand_ratio}};
}

}  // namespace

std::string audit_json(const ClickRecord& r) {
  nlohmann::json j{
      {"ordinal", r.click.ordinal},
      {"x", r.click.x},
      {"y", r.click.y},
      {"polarity", to_string(r.click.polarity)},
      {"progressive", r.progressive},
      {"target_crop", crop_json(r.target)},
      {"focus_crop", crop_json(r.focus)},
      {"focus_fallback", r.focus_fallback},
      {"updated_region", r.updated_region ? box_json(*r.updated_region) : nlohmann::json(nullptr)},
      {"target_area_ratio", r.target_area_ratio},
      {"focus_area_ratio", r.focus_area_ratio},
      {"timings_ms",
       {{"target_crop", r.timings.target_crop_ms},
        {"segment", r.timings.segment_ms},
        {"focus_crop", r.timings.focus_crop_ms},
        {"refine", r.timings.refine_ms},
        {"merge", r.timings.merge_ms},
        {"total", r.timings.total_ms}}},
      {"undone", r.undone}};
  return j.dump();
}

std::optional<BBox> changed_region(const BinaryMask& before, const BinaryMask& after) {
  return mask_bbox(xor_diff(before, after));
}

MergeResult merge_masks(const BinaryMask& prev, const BinaryMask& new_pred, const Click& click,
                        bool progressive) {
  require_same_size(prev.size(), new_pred.size(), "merge_masks");
  if (!progressive) return {new_pred, changed_region(prev, new_pred)};

  const BinaryMask diff = xor_diff(prev, new_pred);
  const Components comps = connected_components(diff, Connectivity::eight);
  if (comps.count == 0) return {prev, std::nullopt};

  int chosen = 0;
  if (prev.in_bounds(click.point())) chosen = comps.labels(click.point());
  if (chosen == 0) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (int y = 0; y < diff.height(); ++y) {
      auto row = comps.labels.row(y);
      for (int x = 0; x < diff.width(); ++x) {
        if (row[x] == 0) continue;
        const std::int64_t dx = x - click.x;
        const std::int64_t dy = y - click.y;
        const std::int64_t d = dx * dx + dy * dy;
        if (d < best || (d == best && row[x] < chosen)) {
          best = d;
          chosen = row[x];
        }
      }
    }
  }

  BinaryMask out = prev;
  const BBox box = component_boxes(comps.labels, comps.count)[static_cast<std::size_t>(chosen)];
  for (int y = box.y0; y < box.y1; ++y) {
    auto labels = comps.labels.row(y);
    auto src = new_pred.row(y);
    auto dst = out.row(y);
    for (int x = box.x0; x < box.x1; ++x) {
      if (labels[x] == chosen) dst[x] = src[x];
    }
  }
  return {std::move(out), box};
}

Session::Session(Image image, std::optional<BinaryMask> initial_mask, ModelSeries series,
                 std::shared_ptr<const Backend> backend)
    : image_(std::move(image)), series_(series), backend_(std::move(backend)) {
  if (!backend_) throw std::invalid_argument("session needs a backend");
  if (image_.empty()) throw std::invalid_argument("session needs a non-empty image");
  if (initial_mask) {
    require_same_size(initial_mask->size(), image_.size(), "initial mask vs image");
    mask_ = std::move(*initial_mask);
    had_initial_ = true;
  } else {
    mask_ = BinaryMask(image_.size(), 0);
  }
}

void Session::push_history(std::optional<std::size_t> audit_index) {
  history_.push_back({mask_, clicks_.size(), had_initial_, audit_index});
  if (history_.size() > kHistoryDepth) history_.pop_front();
}

const ClickRecord& Session::add_click(Polarity polarity, Point p) {
  if (!image_.in_bounds(p)) {
    throw std::out_of_range("click (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                            ") outside image " + image_.size().str());
  }
  const auto t_start = Clock::now();
  const Click click{polarity, p.x, p.y, static_cast<int>(clicks_.size()) + 1};
  std::vector<Click> clicks = clicks_;
  clicks.push_back(click);

  ClickRecord rec;
  rec.click = click;
  rec.progressive = had_initial_ || click.ordinal > kProgressiveAfterClicks;

  auto t = Clock::now();
  rec.target = target_crop(mask_, click, series_);
  SegmentorInput seg;
  seg.crop = rec.target;
  seg.image = crop_resize(image_, rec.target);
  seg.prev_mask = to_scalar(crop_resize(mask_, rec.target));
  std::tie(seg.pos_clicks, seg.neg_clicks) = click_maps(clicks, rec.target);
  rec.timings.target_crop_ms = ms_since(t);

  t = Clock::now();
  const CoarseOutput coarse = backend_->segment(seg);
  validate_output(coarse, rec.target.out);
  rec.timings.segment_ms = ms_since(t);

  t = Clock::now();
  BinaryMask pred = mask_;
  paste_back(binarize(coarse.logits), rec.target, pred);
  if (auto fc = focus_crop(pred, mask_, click, series_)) {
    rec.focus = *fc;
  } else {
    rec.focus = fallback_focus_crop(p, image_.size(), series_);
    rec.focus_fallback = true;
  }
  rec.focus.box = rec.focus.box.intersect(rec.target.box);

  RefinerInput ref;
  ref.crop = rec.focus;
  ref.image = crop_resize(image_, rec.focus);
  std::tie(ref.pos_clicks, ref.neg_clicks) = click_maps(clicks, rec.focus);
  const RectF roi = in_crop_frame(rec.focus.box, rec.target);
  ref.roi_logits = roi_align(coarse.logits, roi, rec.focus.out);
  if (!coarse.feature.empty()) {
    const Size fs = coarse.feature.front().size();
    ref.roi_feature = roi_align(coarse.feature,
                                scaled(roi, double(fs.width) / rec.target.out.width,
                                       double(fs.height) / rec.target.out.height),
                                rec.focus.out);
  }
  rec.timings.focus_crop_ms = ms_since(t);

  t = Clock::now();
  const RefineOutput refined = backend_->refine(ref);
  validate_output(refined, rec.focus.out);
  const ScalarMap fused = fuse(refined.boundary, refined.detail, ref.roi_logits);
  rec.timings.refine_ms = ms_since(t);

  t = Clock::now();
  const ScalarMap patch = resize(fused, rec.focus.box.size());
  for (int y = 0; y < patch.height(); ++y) {
    auto src = patch.row(y);
    auto dst = pred.row(rec.focus.box.y0 + y);
    for (int x = 0; x < patch.width(); ++x) dst[rec.focus.box.x0 + x] = src[x] > 0.0f ? 1 : 0;
  }
  MergeResult merged = merge_masks(mask_, pred, click, rec.progressive);
  rec.updated_region = changed_region(mask_, merged.mask);
  rec.timings.merge_ms = ms_since(t);

  rec.target_area_ratio = area_ratio(rec.target.box, image_.size());
  rec.focus_area_ratio = area_ratio(rec.focus.box, image_.size());
  rec.timings.total_ms = ms_since(t_start);

  push_history(audit_.size());
  mask_ = std::move(merged.mask);
  clicks_ = std::move(clicks);
  audit_.push_back(rec);
  return audit_.back();
}

void Session::undo() {
  if (history_.empty()) throw NothingToUndo();
  Snapshot s = std::move(history_.back());
  history_.pop_back();
  mask_ = std::move(s.mask);
  clicks_.resize(s.clicks);
  had_initial_ = s.had_initial;
  if (s.audit_index) audit_[*s.audit_index].undone = true;
}

void Session::set_mask(BinaryMask m) {
  require_same_size(m.size(), image_.size(), "mask vs image");
  push_history(std::nullopt);
  mask_ = std::move(m);
  had_initial_ = true;
}

std::vector<CropAreaSample> Session::crop_area_samples() const {
  std::vector<CropAreaSample> out;
  for (const auto& r : audit_) {
    if (!r.undone) out.push_back({r.target_area_ratio, r.focus_area_ratio});
  }
  return out;
}

void Session::write_audit(std::ostream& out) const {
  for (const auto& r : audit_) out << audit_json(r) << '\n';
}

}  // namespace localseg
