#pragma once

#include "localseg/raster.hpp"

namespace localseg {

// Disk structuring element: offset (dx, dy) belongs iff dx*dx + dy*dy <= r*r.
// Pixels outside the image count as false, so erosion eats in from the border.

[[nodiscard]] BinaryMask dilate(const BinaryMask& m, int radius);
[[nodiscard]] BinaryMask erode(const BinaryMask& m, int radius);

/// dilate(gt, r) AND NOT erode(gt, r)
[[nodiscard]] BinaryMask boundary_band(const BinaryMask& gt, int radius);

/// Euclidean distance from each pixel to the nearest false pixel, with the
/// area outside the image treated as false. False pixels map to 0.
[[nodiscard]] ScalarMap distance_transform(const BinaryMask& m);

/// Sets every pixel whose center lies within `radius` of p. Clipped at borders.
void stamp_disk(ScalarMap& map, Point p, int radius = 2, float value = 1.0f);

}  // namespace localseg
