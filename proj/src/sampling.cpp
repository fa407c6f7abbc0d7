#include "localseg/sampling.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "localseg/kernels.hpp"

namespace localseg {
namespace {

void check_args(Size src, const BBox& region, Size out) {
  if (out.width < 1 || out.height < 1) {
    throw std::invalid_argument("resample target must be >= 1x1, got " + out.str());
  }
  if (region.empty() || !BBox::of(src).contains(region)) {
    throw std::invalid_argument("resample region " + region.str() + " outside source " + src.str());
  }
}

int nearest_index(int d, int in, int out) {
  const auto s = (static_cast<std::int64_t>(2 * d + 1) * in) / (2 * static_cast<std::int64_t>(out));
  return static_cast<int>(std::min<std::int64_t>(s, in - 1));
}

struct Tap {
  int i0 = 0;
  int i1 = 0;
  float t = 0.0f;
};

std::vector<Tap> bilinear_taps(int in, int out, int offset) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int d = 0; d < out; ++d) {
    double s = (d + 0.5) * scale - 0.5;
    if (s < 0) s = 0;
    int i0 = static_cast<int>(std::floor(s));
    Tap tap;
    if (i0 >= in - 1) {
      tap = {in - 1, in - 1, 0.0f};
    } else {
      tap = {i0, i0 + 1, static_cast<float>(s - i0)};
    }
    tap.i0 += offset;
    tap.i1 += offset;
    taps[static_cast<std::size_t>(d)] = tap;
  }
  return taps;
}

void horizontal(std::span<const float> src, const std::vector<Tap>& taps, std::span<float> dst) {
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const auto& t = taps[i];
    const float a = src[static_cast<std::size_t>(t.i0)];
    const float b = src[static_cast<std::size_t>(t.i1)];
    dst[i] = a + (b - a) * t.t;
  }
}

}  // namespace

BinaryMask resample_region(const BinaryMask& src, const BBox& region, Size out) {
  check_args(src.size(), region, out);
  BinaryMask dst(out);
  std::vector<int> xs(static_cast<std::size_t>(out.width));
  for (int x = 0; x < out.width; ++x) xs[x] = region.x0 + nearest_index(x, region.width(), out.width);
  for (int y = 0; y < out.height; ++y) {
    const auto srow = src.row(region.y0 + nearest_index(y, region.height(), out.height));
    auto drow = dst.row(y);
    for (int x = 0; x < out.width; ++x) drow[x] = srow[static_cast<std::size_t>(xs[x])];
  }
  return dst;
}

ScalarMap resample_region(const ScalarMap& src, const BBox& region, Size out) {
  check_args(src.size(), region, out);
  ScalarMap dst(out);
  const auto xt = bilinear_taps(region.width(), out.width, region.x0);
  const auto yt = bilinear_taps(region.height(), out.height, region.y0);
  std::vector<float> upper(static_cast<std::size_t>(out.width));
  std::vector<float> lower(static_cast<std::size_t>(out.width));
  int cached_upper = -1;
  int cached_lower = -1;
  for (int y = 0; y < out.height; ++y) {
    const auto& t = yt[static_cast<std::size_t>(y)];
    if (t.i0 != cached_upper) {
      if (t.i0 == cached_lower) {
        std::swap(upper, lower);
        std::swap(cached_upper, cached_lower);
      } else {
        horizontal(src.row(t.i0), xt, upper);
        cached_upper = t.i0;
      }
    }
    if (t.i1 != cached_lower) {
      horizontal(src.row(t.i1), xt, lower);
      cached_lower = t.i1;
    }
    kernels::lerp(upper, lower, t.t, dst.row(y));
  }
  return dst;
}

BinaryMask resize(const BinaryMask& m, Size to) { return resample_region(m, m.bounds(), to); }

ScalarMap resize(const ScalarMap& m, Size to) { return resample_region(m, m.bounds(), to); }

RgbPlanes resample_region(const Image& src, const BBox& region, Size out) {
  check_args(src.size(), region, out);
  RgbPlanes planes{ScalarMap(region.size()), ScalarMap(region.size()), ScalarMap(region.size())};
  for (int y = 0; y < region.height(); ++y) {
    const auto srow = src.row(region.y0 + y);
    for (int x = 0; x < region.width(); ++x) {
      const Rgb& px = srow[static_cast<std::size_t>(region.x0 + x)];
      for (int c = 0; c < 3; ++c) planes[c](x, y) = px[c] / 255.0f;
    }
  }
  if (region.size() == out) return planes;
  for (auto& p : planes) p = resize(p, out);
  return planes;
}

}  // namespace localseg
