#pragma once

#include <array>

#include "localseg/raster.hpp"

namespace localseg {

inline constexpr std::array<int, 6> kSlicPixelCounts{50, 100, 200, 300, 500, 700};

struct SlicConfig {
  int pixel_count = 100;  // requested number of superpixels K
  double compactness = 10.0;
  int iterations = 10;
};

struct Superpixels {
  LabelMap labels;  // 1..count, every cluster 4-connected
  int count = 0;
};

/// k-means over (CIELAB, xy) with distance d_lab + (m / S) * d_xy,
/// S = sqrt(N / K), grid-seeded centers nudged to the 3x3 gradient minimum,
/// then orphan fragments folded into their largest 4-adjacent neighbour.
/// Throws std::invalid_argument when K < 2 or the image has fewer than K pixels.
[[nodiscard]] Superpixels slic(const Image& image, const SlicConfig& cfg);

/// sRGB (D65) to CIELAB.
[[nodiscard]] std::array<float, 3> rgb_to_lab(const Rgb& c);

}  // namespace localseg
