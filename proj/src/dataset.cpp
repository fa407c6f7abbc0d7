#include "localseg/dataset.hpp"

#include <algorithm>
#include <map>

#include <spdlog/spdlog.h>

#include "localseg/image_io.hpp"
#include "localseg/masks.hpp"

namespace localseg {
namespace {

bool is_image_ext(std::string ext) {
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

std::vector<SampleRef> list_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  const fs::path images = root / "images";
  const fs::path masks = root / "masks";
  if (!fs::is_directory(images) || !fs::is_directory(masks)) {
    throw Error("dataset " + root.string() + " needs images/ and masks/ directories");
  }
  std::map<std::string, fs::path> found;
  for (const auto& e : fs::directory_iterator(images)) {
    if (!e.is_regular_file() || !is_image_ext(e.path().extension().string())) continue;
    const std::string id = e.path().stem().string();
    if (found.contains(id)) {
      spdlog::warn("dataset: duplicate image for id {}, keeping {}", id, found[id].string());
      continue;
    }
    found[id] = e.path();
  }
  std::vector<SampleRef> refs;
  for (const auto& [id, image] : found) {
    const fs::path mask = masks / (id + ".png");
    if (!fs::exists(mask)) {
      spdlog::warn("dataset: no mask for {}, skipping", id);
      continue;
    }
    SampleRef ref{id, image, mask, std::nullopt};
    const fs::path init = root / "init_masks" / (id + ".png");
    if (fs::exists(init)) ref.init_mask = init;
    refs.push_back(std::move(ref));
  }
  return refs;
}

std::optional<Sample> load_sample(const SampleRef& ref, bool with_initial) {
  Sample s;
  s.id = ref.id;
  try {
    s.image = read_image(ref.image);
    s.gt = read_mask(ref.mask);
    if (with_initial && ref.init_mask) s.initial = read_mask(*ref.init_mask);
  } catch (const DecodeError& e) {
    spdlog::warn("dataset: skipping {}: {}", ref.id, e.what());
    return std::nullopt;
  }
  require_same_size(s.gt.size(), s.image.size(), ("mask vs image for " + ref.id).c_str());
  if (s.initial) {
    require_same_size(s.initial->size(), s.image.size(), ("init mask vs image for " + ref.id).c_str());
  }
  const std::int64_t n = count_true(s.gt);
  if (n < kMinMaskPixels) {
    spdlog::info("dataset: skipping {}: mask has {} pixels (< {})", ref.id, n, kMinMaskPixels);
    return std::nullopt;
  }
  return s;
}

std::vector<Sample> load_dataset(const std::filesystem::path& root, bool with_initial) {
  std::vector<Sample> out;
  for (const auto& ref : list_dataset(root)) {
    if (auto s = load_sample(ref, with_initial)) out.push_back(std::move(*s));
  }
  return out;
}

}  // namespace localseg
