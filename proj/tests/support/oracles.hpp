#pragma once

// Slow, obviously-correct reference implementations used to check the
// library. Nothing here calls into the code under test.

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "localseg/raster.hpp"

namespace oracle {

using localseg::BinaryMask;
using localseg::LabelMap;
using localseg::ScalarMap;

/// BFS flood fill started at each unlabeled foreground pixel in scan order.
inline LabelMap flood_fill_labels(const BinaryMask& m, bool eight, int* count = nullptr) {
  LabelMap labels(m.size(), 0);
  int next = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m(x, y) || labels(x, y)) continue;
      ++next;
      std::deque<std::pair<int, int>> q{{x, y}};
      labels(x, y) = next;
      while (!q.empty()) {
        auto [cx, cy] = q.front();
        q.pop_front();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (!eight && dx != 0 && dy != 0) continue;
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (m.in_bounds(nx, ny) && m(nx, ny) && !labels(nx, ny)) {
              labels(nx, ny) = next;
              q.push_back({nx, ny});
            }
          }
        }
      }
    }
  }
  if (count) *count = next;
  return labels;
}

/// Distance from each pixel to the nearest false pixel, where the ring of
/// pixels just outside the image counts as false.
inline ScalarMap brute_distance(const BinaryMask& m) {
  ScalarMap out(m.size(), 0.0f);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m(x, y)) continue;
      double best = std::numeric_limits<double>::max();
      for (int v = -1; v <= m.height(); ++v) {
        for (int u = -1; u <= m.width(); ++u) {
          const bool outside = !m.in_bounds(u, v);
          if (outside || !m(u, v)) best = std::min(best, std::hypot(double(u - x), double(v - y)));
        }
      }
      out(x, y) = static_cast<float>(best);
    }
  }
  return out;
}

/// Disk morphology by direct neighbourhood enumeration; outside = false.
inline BinaryMask brute_morph(const BinaryMask& m, int r, bool dilate) {
  BinaryMask out(m.size(), 0);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool any = false;
      bool all = true;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (dx * dx + dy * dy > r * r) continue;
          const bool v = m.in_bounds(x + dx, y + dy) && m(x + dx, y + dy);
          any = any || v;
          all = all && v;
        }
      }
      out(x, y) = (dilate ? any : all) ? 1 : 0;
    }
  }
  return out;
}

/// Half-pixel nearest source index.
inline int nearest_index(int d, int in, int out) {
  return std::min(in - 1, static_cast<int>(std::floor((d + 0.5) * in / out)));
}

/// Half-pixel bilinear sample of `src` at continuous (x, y), clamped.
inline double bilinear_at(const ScalarMap& src, double x, double y) {
  x = std::clamp(x, 0.0, double(src.width() - 1));
  y = std::clamp(y, 0.0, double(src.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, src.width() - 1);
  const int y1 = std::min(y0 + 1, src.height() - 1);
  const double tx = x - x0;
  const double ty = y - y0;
  return (1 - tx) * (1 - ty) * src(x0, y0) + tx * (1 - ty) * src(x1, y0) + (1 - tx) * ty * src(x0, y1) +
         tx * ty * src(x1, y1);
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

inline BinaryMask random_mask(int w, int h, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  BinaryMask m(w, h);
  for (auto& v : m.values()) v = coin(rng) ? 1 : 0;
  return m;
}

inline double brute_iou(const BinaryMask& a, const BinaryMask& b) {
  std::int64_t i = 0, u = 0;
  for (std::size_t k = 0; k < a.pixel_count(); ++k) {
    i += a.values()[k] && b.values()[k];
    u += a.values()[k] || b.values()[k];
  }
  return u == 0 ? 1.0 : double(i) / double(u);
}

inline BinaryMask rect_mask(localseg::Size s, localseg::BBox b) {
  BinaryMask m(s, 0);
  for (int y = b.y0; y < b.y1; ++y) {
    for (int x = b.x0; x < b.x1; ++x) m(x, y) = 1;
  }
  return m;
}

inline BinaryMask disk_mask(localseg::Size s, double cx, double cy, double r) {
  BinaryMask m(s, 0);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      m(x, y) = dx * dx + dy * dy <= r * r ? 1 : 0;
    }
  }
  return m;
}

}  // namespace oracle
