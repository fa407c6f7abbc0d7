// Compiled with -mavx2 -mfma -ffp-contract=off. Only reached through the
// dispatcher after a CPUID check.

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "localseg/kernels.hpp"

namespace localseg::kernels::avx2 {
namespace {

// Cephes-style single precision exp, max relative error around 2e-7.
__m256 exp256(__m256 x) {
  const __m256 hi = _mm256_set1_ps(88.3762626647949f);
  const __m256 lo = _mm256_set1_ps(-88.3762626647949f);
  x = _mm256_min_ps(_mm256_max_ps(x, lo), hi);

  __m256 fx = _mm256_add_ps(_mm256_mul_ps(x, _mm256_set1_ps(1.44269504088896341f)),
                            _mm256_set1_ps(0.5f));
  fx = _mm256_floor_ps(fx);
  x = _mm256_sub_ps(x, _mm256_mul_ps(fx, _mm256_set1_ps(0.693359375f)));
  x = _mm256_sub_ps(x, _mm256_mul_ps(fx, _mm256_set1_ps(-2.12194440e-4f)));

  const __m256 z = _mm256_mul_ps(x, x);
  __m256 y = _mm256_set1_ps(1.9875691500e-4f);
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.3981999507e-3f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(8.3334519073e-3f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(4.1665795894e-2f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.6666665459e-1f));
  y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(5.0000001201e-1f));
  y = _mm256_fmadd_ps(y, z, x);
  y = _mm256_add_ps(y, _mm256_set1_ps(1.0f));

  __m256i n = _mm256_cvttps_epi32(fx);
  n = _mm256_add_epi32(n, _mm256_set1_epi32(0x7f));
  n = _mm256_slli_epi32(n, 23);
  return _mm256_mul_ps(y, _mm256_castsi256_ps(n));
}

std::int64_t hsum_epi64(__m256i v) {
  alignas(32) std::int64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
  return lanes[0] + lanes[1] + lanes[2] + lanes[3];
}

}  // namespace

void fuse(std::span<const float> gate, std::span<const float> detail,
          std::span<const float> coarse, std::span<float> out) {
  const std::size_t n = out.size();
  const __m256 one = _mm256_set1_ps(1.0f);
  const __m256 sign = _mm256_set1_ps(-0.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 g = _mm256_loadu_ps(gate.data() + i);
    const __m256 s = _mm256_div_ps(one, _mm256_add_ps(one, exp256(_mm256_xor_ps(g, sign))));
    const __m256 d = _mm256_loadu_ps(detail.data() + i);
    const __m256 c = _mm256_loadu_ps(coarse.data() + i);
    const __m256 r = _mm256_add_ps(_mm256_mul_ps(s, d), _mm256_mul_ps(_mm256_sub_ps(one, s), c));
    _mm256_storeu_ps(out.data() + i, r);
  }
  for (; i < n; ++i) {
    const float s = 1.0f / (1.0f + std::exp(-gate[i]));
    out[i] = s * detail[i] + (1.0f - s) * coarse[i];
  }
}

void binarize(std::span<const float> in, float threshold, std::span<std::uint8_t> out) {
  const std::size_t n = in.size();
  const __m256 t = _mm256_set1_ps(threshold);
  const __m256i order = _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7);
  const __m256i one = _mm256_set1_epi8(1);
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i c0 = _mm256_castps_si256(_mm256_cmp_ps(_mm256_loadu_ps(in.data() + i), t, _CMP_GT_OQ));
    const __m256i c1 = _mm256_castps_si256(_mm256_cmp_ps(_mm256_loadu_ps(in.data() + i + 8), t, _CMP_GT_OQ));
    const __m256i c2 = _mm256_castps_si256(_mm256_cmp_ps(_mm256_loadu_ps(in.data() + i + 16), t, _CMP_GT_OQ));
    const __m256i c3 = _mm256_castps_si256(_mm256_cmp_ps(_mm256_loadu_ps(in.data() + i + 24), t, _CMP_GT_OQ));
    const __m256i p = _mm256_packs_epi16(_mm256_packs_epi32(c0, c1), _mm256_packs_epi32(c2, c3));
    const __m256i bytes = _mm256_and_si256(_mm256_permutevar8x32_epi32(p, order), one);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.data() + i), bytes);
  }
  for (; i < n; ++i) out[i] = in[i] > threshold ? 1 : 0;
}

void xor_masks(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
               std::span<std::uint8_t> out) {
  const std::size_t n = a.size();
  const __m256i one = _mm256_set1_epi8(1);
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i x = _mm256_min_epu8(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + i)), one);
    const __m256i y = _mm256_min_epu8(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + i)), one);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.data() + i), _mm256_xor_si256(x, y));
  }
  for (; i < n; ++i) out[i] = (a[i] != 0) != (b[i] != 0) ? 1 : 0;
}

Overlap overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  const std::size_t n = a.size();
  const __m256i one = _mm256_set1_epi8(1);
  const __m256i zero = _mm256_setzero_si256();
  __m256i inter = zero;
  __m256i uni = zero;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i x = _mm256_min_epu8(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + i)), one);
    const __m256i y = _mm256_min_epu8(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + i)), one);
    inter = _mm256_add_epi64(inter, _mm256_sad_epu8(_mm256_and_si256(x, y), zero));
    uni = _mm256_add_epi64(uni, _mm256_sad_epu8(_mm256_or_si256(x, y), zero));
  }
  Overlap r{hsum_epi64(inter), hsum_epi64(uni)};
  for (; i < n; ++i) {
    const bool x = a[i] != 0;
    const bool y = b[i] != 0;
    r.intersection += (x && y) ? 1 : 0;
    r.union_count += (x || y) ? 1 : 0;
  }
  return r;
}

std::int64_t count_nonzero(std::span<const std::uint8_t> a) {
  const std::size_t n = a.size();
  const __m256i one = _mm256_set1_epi8(1);
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc = zero;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i x = _mm256_min_epu8(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + i)), one);
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(x, zero));
  }
  std::int64_t total = hsum_epi64(acc);
  for (; i < n; ++i) total += a[i] != 0 ? 1 : 0;
  return total;
}

void lerp(std::span<const float> a, std::span<const float> b, float t, std::span<float> out) {
  const std::size_t n = out.size();
  const __m256 tv = _mm256_set1_ps(t);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 x = _mm256_loadu_ps(a.data() + i);
    const __m256 y = _mm256_loadu_ps(b.data() + i);
    // mul then add, not fma, so results match the scalar path bit for bit
    _mm256_storeu_ps(out.data() + i, _mm256_add_ps(x, _mm256_mul_ps(_mm256_sub_ps(y, x), tv)));
  }
  for (; i < n; ++i) out[i] = a[i] + (b[i] - a[i]) * t;
}

}  // namespace localseg::kernels::avx2
