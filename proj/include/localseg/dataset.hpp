#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "localseg/raster.hpp"

namespace localseg {

/// Ground-truth masks with fewer true pixels are dropped on load.
inline constexpr std::int64_t kMinMaskPixels = 300;

// Layout:
//   <root>/images/<id>.png|jpg|jpeg
//   <root>/masks/<id>.png
//   <root>/init_masks/<id>.png   (optional)

struct SampleRef {
  std::string id;
  std::filesystem::path image;
  std::filesystem::path mask;
  std::optional<std::filesystem::path> init_mask;
};

struct Sample {
  std::string id;
  Image image;
  BinaryMask gt;
  std::optional<BinaryMask> initial;
};

/// Samples with an image and a mask, sorted by id.
[[nodiscard]] std::vector<SampleRef> list_dataset(const std::filesystem::path& root);

/// nullopt (with a logged warning) for unreadable files or masks under the
/// pixel floor. Throws DimensionMismatch when image and masks disagree.
[[nodiscard]] std::optional<Sample> load_sample(const SampleRef& ref, bool with_initial);

[[nodiscard]] std::vector<Sample> load_dataset(const std::filesystem::path& root, bool with_initial);

}  // namespace localseg
