#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "localseg/kernels.hpp"

namespace localseg::kernels {
namespace {

Isa detect() {
  if (const char* env = std::getenv("LOCALSEG_FORCE_SCALAR"); env && std::string(env) == "1") {
    return Isa::scalar;
  }
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

[[nodiscard]] bool use_avx2() {
#ifdef LOCALSEG_HAS_AVX2_KERNELS
  return current().load(std::memory_order_relaxed) == Isa::avx2;
#else
  return false;
#endif
}

void require_equal(std::size_t a, std::size_t b, const char* fn) {
  if (a != b) {
    throw std::invalid_argument(std::string(fn) + ": span lengths differ (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#ifdef LOCALSEG_HAS_AVX2_KERNELS
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::runtime_error("ISA not supported on this CPU: " + std::string(isa_name(isa)));
  }
  current().store(isa, std::memory_order_relaxed);
}

void fuse(std::span<const float> gate, std::span<const float> detail,
          std::span<const float> coarse, std::span<float> out) {
  require_equal(gate.size(), out.size(), "fuse");
  require_equal(detail.size(), out.size(), "fuse");
  require_equal(coarse.size(), out.size(), "fuse");
#ifdef LOCALSEG_HAS_AVX2_KERNELS
  if (use_avx2()) return avx2::fuse(gate, detail, coarse, out);
#endif
  scalar::fuse(gate, detail, coarse, out);
}

void binarize(std::span<const float> in, float threshold, std::span<std::uint8_t> out) {
  require_equal(in.size(), out.size(), "binarize");
#ifdef LOCALSEG_HAS_AVX2_KERNELS
  if (use_avx2()) return avx2::binarize(in, threshold, out);
#endif
  scalar::binarize(in, threshold, out);
}

void xor_masks(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
               std::span<std::uint8_t> out) {
  require_equal(a.size(), b.size(), "xor_masks");
  require_equal(a.size(), out.size(), "xor_masks");
#ifdef LOCALSEG_HAS_AVX2_KERNELS
  if (use_avx2()) return avx2::xor_masks(a, b, out);
#endif
  scalar::xor_masks(a, b, out);
}

Overlap overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  require_equal(a.size(), b.size(), "overlap");
#ifdef LOCALSEG_HAS_AVX2_KERNELS
  if (use_avx2()) return avx2::overlap(a, b);
#endif
  return scalar::overlap(a, b);
}

std::int64_t count_nonzero(std::span<const std::uint8_t> a) {
#ifdef LOCALSEG_HAS_AVX2_KERNELS
  if (use_avx2()) return avx2::count_nonzero(a);
#endif
  return scalar::count_nonzero(a);
}

void lerp(std::span<const float> a, std::span<const float> b, float t, std::span<float> out) {
  require_equal(a.size(), out.size(), "lerp");
  require_equal(b.size(), out.size(), "lerp");
#ifdef LOCALSEG_HAS_AVX2_KERNELS
  if (use_avx2()) return avx2::lerp(a, b, t, out);
#endif
  scalar::lerp(a, b, t, out);
}

}  // namespace localseg::kernels
