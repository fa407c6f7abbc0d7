#include <cmath>
#include <cstddef>

#include "localseg/kernels.hpp"

namespace localseg::kernels::scalar {

void fuse(std::span<const float> gate, std::span<const float> detail,
          std::span<const float> coarse, std::span<float> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float s = 1.0f / (1.0f + std::exp(-gate[i]));
    out[i] = s * detail[i] + (1.0f - s) * coarse[i];
  }
}

void binarize(std::span<const float> in, float threshold, std::span<std::uint8_t> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > threshold ? 1 : 0;
}

void xor_masks(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
               std::span<std::uint8_t> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] != 0) != (b[i] != 0) ? 1 : 0;
}

Overlap overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  Overlap r;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0;
    const bool y = b[i] != 0;
    r.intersection += (x && y) ? 1 : 0;
    r.union_count += (x || y) ? 1 : 0;
  }
  return r;
}

std::int64_t count_nonzero(std::span<const std::uint8_t> a) {
  std::int64_t n = 0;
  for (auto v : a) n += v != 0 ? 1 : 0;
  return n;
}

void lerp(std::span<const float> a, std::span<const float> b, float t, std::span<float> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + (b[i] - a[i]) * t;
}

}  // namespace localseg::kernels::scalar
