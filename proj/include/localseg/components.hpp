#pragma once

#include <optional>
#include <vector>

#include "localseg/raster.hpp"

namespace localseg {

enum class Connectivity { four = 4, eight = 8 };

struct Components {
  LabelMap labels;  // 0 background, 1..count in first-touch row-major order
  int count = 0;
};

/// Union-find two-pass labeling. Label ids follow the row-major position of
/// each component's first pixel, so the result equals a scan-order flood fill.
[[nodiscard]] Components connected_components(const BinaryMask& m,
                                              Connectivity conn = Connectivity::eight);

[[nodiscard]] std::optional<int> component_containing(const LabelMap& labels, Point p);

/// Pixel count per label; index 0 counts background.
[[nodiscard]] std::vector<std::int64_t> component_sizes(const LabelMap& labels);

/// Largest label by pixel count, ties to the smaller id.
[[nodiscard]] std::optional<int> largest_component(const LabelMap& labels);

[[nodiscard]] BinaryMask component_mask(const LabelMap& labels, int id);

/// Tight box per label; index 0 unused.
[[nodiscard]] std::vector<BBox> component_boxes(const LabelMap& labels, int count);

}  // namespace localseg
