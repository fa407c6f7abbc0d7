#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "localseg/raster.hpp"

namespace localseg {

struct SceneConfig {
  Size size{320, 240};
  std::int64_t min_object_pixels = 2500;
  std::int64_t max_object_pixels = 12000;
  int distractors = 2;
};

struct Scene {
  Image image;
  BinaryMask gt;  // one 8-connected object
};

/// Textured background, one ellipse or star polygon as the target object and
/// a few distractor shapes that do not touch it. Pure function of the seed.
[[nodiscard]] Scene make_scene(const SceneConfig& cfg, std::uint64_t seed);

/// Writes images/scene_NNN.png and masks/scene_NNN.png under root.
void write_synthetic_dataset(const std::filesystem::path& root, int count, const SceneConfig& cfg,
                             std::uint64_t seed);

}  // namespace localseg
