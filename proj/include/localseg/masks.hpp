#pragma once

#include <optional>

#include "localseg/raster.hpp"

namespace localseg {

/// |a ∩ b| / |a ∪ b|; two empty masks score 1.0.
[[nodiscard]] double iou(const BinaryMask& a, const BinaryMask& b);

[[nodiscard]] BinaryMask xor_diff(const BinaryMask& a, const BinaryMask& b);

[[nodiscard]] std::int64_t count_true(const BinaryMask& m);

/// Tight box around the true pixels, or nullopt for an empty mask.
[[nodiscard]] std::optional<BBox> mask_bbox(const BinaryMask& m);

/// Logit-space threshold: pixel is true iff value > threshold.
[[nodiscard]] BinaryMask binarize(const ScalarMap& m, float threshold = 0.0f);

/// 0/1 mask as a float map.
[[nodiscard]] ScalarMap to_scalar(const BinaryMask& m);

}  // namespace localseg
