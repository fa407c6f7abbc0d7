#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and an AVX2
// variant; the dispatcher picks one once at startup based on CPUID. Setting
// LOCALSEG_FORCE_SCALAR=1 in the environment pins the scalar path.

#include <cstdint>
#include <span>
#include <string_view>

namespace localseg::kernels {

enum class Isa { scalar, avx2 };

[[nodiscard]] std::string_view isa_name(Isa isa);
[[nodiscard]] bool isa_supported(Isa isa);
[[nodiscard]] Isa active_isa();

/// Switches every dispatched kernel. Throws if the CPU lacks the ISA.
void force_isa(Isa isa);

struct Overlap {
  std::int64_t intersection = 0;
  std::int64_t union_count = 0;
};

// Dispatched entry points. All spans of one call must have equal length.

/// out = sigmoid(gate) * detail + (1 - sigmoid(gate)) * coarse
void fuse(std::span<const float> gate, std::span<const float> detail,
          std::span<const float> coarse, std::span<float> out);
/// out = (in > threshold) ? 1 : 0
void binarize(std::span<const float> in, float threshold, std::span<std::uint8_t> out);
void xor_masks(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
               std::span<std::uint8_t> out);
[[nodiscard]] Overlap overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
[[nodiscard]] std::int64_t count_nonzero(std::span<const std::uint8_t> a);
/// out = a + (b - a) * t
void lerp(std::span<const float> a, std::span<const float> b, float t, std::span<float> out);

namespace scalar {
void fuse(std::span<const float> gate, std::span<const float> detail,
          std::span<const float> coarse, std::span<float> out);
void binarize(std::span<const float> in, float threshold, std::span<std::uint8_t> out);
void xor_masks(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
               std::span<std::uint8_t> out);
Overlap overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
std::int64_t count_nonzero(std::span<const std::uint8_t> a);
void lerp(std::span<const float> a, std::span<const float> b, float t, std::span<float> out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define LOCALSEG_HAS_AVX2_KERNELS 1
namespace avx2 {
void fuse(std::span<const float> gate, std::span<const float> detail,
          std::span<const float> coarse, std::span<float> out);
void binarize(std::span<const float> in, float threshold, std::span<std::uint8_t> out);
void xor_masks(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
               std::span<std::uint8_t> out);
Overlap overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
std::int64_t count_nonzero(std::span<const std::uint8_t> a);
void lerp(std::span<const float> a, std::span<const float> b, float t, std::span<float> out);
}  // namespace avx2
#endif

}  // namespace localseg::kernels
