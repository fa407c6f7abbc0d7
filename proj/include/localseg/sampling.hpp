#pragma once

#include <array>

#include "localseg/raster.hpp"

namespace localseg {

// Half-pixel-center convention (align_corners = false) throughout. Nearest
// maps output index d to source floor((d + 0.5) * in / out); bilinear samples
// source coordinate (d + 0.5) * in / out - 0.5, clamped to the valid range.

/// Nearest-neighbour resample of `region` of `src` to `out`.
[[nodiscard]] BinaryMask resample_region(const BinaryMask& src, const BBox& region, Size out);
/// Bilinear resample of `region` of `src` to `out`.
[[nodiscard]] ScalarMap resample_region(const ScalarMap& src, const BBox& region, Size out);

[[nodiscard]] BinaryMask resize(const BinaryMask& m, Size to);
[[nodiscard]] ScalarMap resize(const ScalarMap& m, Size to);

/// Float RGB planes in [0, 1] for a region of an image, bilinear.
using RgbPlanes = std::array<ScalarMap, 3>;
[[nodiscard]] RgbPlanes resample_region(const Image& src, const BBox& region, Size out);

}  // namespace localseg
