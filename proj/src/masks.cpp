#include "localseg/masks.hpp"

#include "localseg/kernels.hpp"

namespace localseg {

double iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_size(a.size(), b.size(), "iou");
  const auto o = kernels::overlap(a.values(), b.values());
  if (o.union_count == 0) return 1.0;
  return static_cast<double>(o.intersection) / static_cast<double>(o.union_count);
}

BinaryMask xor_diff(const BinaryMask& a, const BinaryMask& b) {
  require_same_size(a.size(), b.size(), "xor_diff");
  BinaryMask out(a.size());
  kernels::xor_masks(a.values(), b.values(), out.values());
  return out;
}

std::int64_t count_true(const BinaryMask& m) { return kernels::count_nonzero(m.values()); }

std::optional<BBox> mask_bbox(const BinaryMask& m) {
  BBox box{m.width(), m.height(), 0, 0};
  bool any = false;
  for (int y = 0; y < m.height(); ++y) {
    const auto row = m.row(y);
    for (int x = 0; x < m.width(); ++x) {
      if (!row[x]) continue;
      any = true;
      box.x0 = std::min(box.x0, x);
      box.x1 = std::max(box.x1, x + 1);
      box.y0 = std::min(box.y0, y);
      box.y1 = std::max(box.y1, y + 1);
    }
  }
  if (!any) return std::nullopt;
  return box;
}

BinaryMask binarize(const ScalarMap& m, float threshold) {
  BinaryMask out(m.size());
  kernels::binarize(m.values(), threshold, out.values());
  return out;
}

ScalarMap to_scalar(const BinaryMask& m) {
  ScalarMap out(m.size());
  auto src = m.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 1.0f : 0.0f;
  return out;
}

}  // namespace localseg
