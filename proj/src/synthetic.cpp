#include "localseg/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "localseg/components.hpp"
#include "localseg/image_io.hpp"
#include "localseg/masks.hpp"
#include "localseg/morphology.hpp"
#include "localseg/rng.hpp"

namespace localseg {
namespace {

struct Shape {
  double cx, cy;
  bool ellipse;
  double rx, ry, angle;        // ellipse
  std::vector<double> radii;   // star polygon, evenly spaced angles
};

Shape random_shape(Rng& rng, Size size, double scale) {
  Shape s{};
  s.cx = rng.uniform(0.25, 0.75) * size.width;
  s.cy = rng.uniform(0.25, 0.75) * size.height;
  s.ellipse = rng.bernoulli(0.5);
  s.angle = rng.uniform(0.0, std::numbers::pi);
  if (s.ellipse) {
    s.rx = scale * rng.uniform(0.7, 1.3);
    s.ry = scale * rng.uniform(0.6, 1.2);
  } else {
    const int n = static_cast<int>(rng.uniform_int(5, 8));
    for (int i = 0; i < 2 * n; ++i) {
      s.radii.push_back(scale * (i % 2 == 0 ? rng.uniform(1.0, 1.35) : rng.uniform(0.6, 0.85)));
    }
  }
  return s;
}

bool inside(const Shape& s, double x, double y) {
  const double dx = x - s.cx;
  const double dy = y - s.cy;
  const double c = std::cos(s.angle);
  const double sn = std::sin(s.angle);
  const double u = c * dx + sn * dy;
  const double v = -sn * dx + c * dy;
  if (s.ellipse) return (u * u) / (s.rx * s.rx) + (v * v) / (s.ry * s.ry) <= 1.0;
  // Star: compare radius against the polygon edge along this direction.
  const auto n = static_cast<int>(s.radii.size());
  double theta = std::atan2(v, u);
  if (theta < 0) theta += 2 * std::numbers::pi;
  const double sector = 2 * std::numbers::pi / n;
  const int i = std::min(n - 1, static_cast<int>(theta / sector));
  const double a0 = i * sector;
  const double a1 = a0 + sector;
  const double x0 = s.radii[i] * std::cos(a0);
  const double y0 = s.radii[i] * std::sin(a0);
  const double x1 = s.radii[(i + 1) % n] * std::cos(a1);
  const double y1 = s.radii[(i + 1) % n] * std::sin(a1);
  // Point is inside when it lies on the origin's side of edge (p0, p1).
  const double cross_p = (x1 - x0) * (v - y0) - (y1 - y0) * (u - x0);
  const double cross_o = (x1 - x0) * (0 - y0) - (y1 - y0) * (0 - x0);
  return cross_p * cross_o >= 0;
}

BinaryMask rasterize(const Shape& s, Size size) {
  BinaryMask m(size, 0);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) m(x, y) = inside(s, x + 0.5, y + 0.5) ? 1 : 0;
  }
  return m;
}

Rgb random_color(Rng& rng) {
  return {static_cast<std::uint8_t>(rng.uniform_int(20, 235)), static_cast<std::uint8_t>(rng.uniform_int(20, 235)),
          static_cast<std::uint8_t>(rng.uniform_int(20, 235))};
}

int color_distance(const Rgb& a, const Rgb& b) {
  int d = 0;
  for (int c = 0; c < 3; ++c) d += std::abs(int(a[c]) - int(b[c]));
  return d;
}

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0)); }

}  // namespace

Scene make_scene(const SceneConfig& cfg, std::uint64_t seed) {
  if (cfg.min_object_pixels > cfg.max_object_pixels) throw std::invalid_argument("object pixel range is empty");
  Rng rng(seed);
  const Size size = cfg.size;

  BinaryMask gt;
  for (int tries = 0;; ++tries) {
    if (tries > 200) throw std::runtime_error("make_scene: cannot place an object of the requested size");
    const double target = rng.uniform(double(cfg.min_object_pixels), double(cfg.max_object_pixels));
    const Shape s = random_shape(rng, size, std::sqrt(target / std::numbers::pi));
    BinaryMask m = rasterize(s, size);
    const auto comps = connected_components(m, Connectivity::eight);
    if (comps.count != 1) continue;
    const std::int64_t n = count_true(m);
    if (n < cfg.min_object_pixels || n > cfg.max_object_pixels) continue;
    gt = std::move(m);
    break;
  }

  const Rgb bg_a = random_color(rng);
  const Rgb bg_b = random_color(rng);
  Rgb fg = random_color(rng);
  while (color_distance(fg, bg_a) < 150 || color_distance(fg, bg_b) < 150) fg = random_color(rng);

  Image img(size);
  const double fx = rng.uniform(0.02, 0.08);
  const double fy = rng.uniform(0.02, 0.08);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const double t = 0.5 + 0.5 * std::sin(fx * x) * std::cos(fy * y);
      Rgb p;
      for (int c = 0; c < 3; ++c) p[c] = clamp_u8(bg_a[c] + (bg_b[c] - bg_a[c]) * t + rng.uniform(-12, 12));
      img(x, y) = p;
    }
  }

  const BinaryMask keep_out = dilate(gt, 6);
  for (int d = 0; d < cfg.distractors; ++d) {
    const Shape s = random_shape(rng, size, rng.uniform(8.0, 20.0));
    const Rgb color = random_color(rng);
    const BinaryMask m = rasterize(s, size);
    for (int y = 0; y < size.height; ++y) {
      for (int x = 0; x < size.width; ++x) {
        if (m(x, y) && !keep_out(x, y)) img(x, y) = color;
      }
    }
  }

  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      if (!gt(x, y)) continue;
      Rgb p;
      for (int c = 0; c < 3; ++c) p[c] = clamp_u8(fg[c] + rng.uniform(-10, 10));
      img(x, y) = p;
    }
  }
  return {std::move(img), std::move(gt)};
}

void write_synthetic_dataset(const std::filesystem::path& root, int count, const SceneConfig& cfg,
                             std::uint64_t seed) {
  for (int i = 0; i < count; ++i) {
    const Scene s = make_scene(cfg, hash_combine(seed, static_cast<std::uint64_t>(i)));
    char id[32];
    std::snprintf(id, sizeof id, "scene_%03d", i);
    write_image_png(root / "images" / (std::string(id) + ".png"), s.image);
    write_mask_png(root / "masks" / (std::string(id) + ".png"), s.gt);
  }
}

}  // namespace localseg
