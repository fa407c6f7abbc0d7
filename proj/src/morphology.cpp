#include "localseg/morphology.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace localseg {
namespace {

// Largest k with k*k <= r*r - dy*dy.
int disk_half_width(int radius, int dy) {
  const int rem = radius * radius - dy * dy;
  int k = static_cast<int>(std::sqrt(static_cast<double>(rem)));
  while (k * k > rem) --k;
  while ((k + 1) * (k + 1) <= rem) ++k;
  return k;
}

// prefix[y][i] = number of true pixels in row y with x < i
std::vector<std::vector<int>> row_prefix(const BinaryMask& m) {
  std::vector<std::vector<int>> prefix(static_cast<std::size_t>(m.height()));
  for (int y = 0; y < m.height(); ++y) {
    auto& p = prefix[static_cast<std::size_t>(y)];
    p.assign(static_cast<std::size_t>(m.width()) + 1, 0);
    const auto row = m.row(y);
    for (int x = 0; x < m.width(); ++x) p[x + 1] = p[x] + (row[x] ? 1 : 0);
  }
  return prefix;
}

void check_radius(int radius) {
  if (radius < 0) throw std::invalid_argument("structuring element radius must be >= 0");
}

// One pass of the Felzenszwalb-Huttenlocher lower envelope over squared distances.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    double s = 0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[k]) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

BinaryMask dilate(const BinaryMask& m, int radius) {
  check_radius(radius);
  const int w = m.width();
  const int h = m.height();
  BinaryMask out(m.size());
  const auto prefix = row_prefix(m);
  for (int y = 0; y < h; ++y) {
    auto dst = out.row(y);
    for (int dy = -radius; dy <= radius; ++dy) {
      const int sy = y + dy;
      if (sy < 0 || sy >= h) continue;
      const int hw = disk_half_width(radius, dy);
      const auto& p = prefix[static_cast<std::size_t>(sy)];
      if (p[w] == 0) continue;
      for (int x = 0; x < w; ++x) {
        if (dst[x]) continue;
        const int lo = std::max(0, x - hw);
        const int hi = std::min(w, x + hw + 1);
        if (p[hi] - p[lo] > 0) dst[x] = 1;
      }
    }
  }
  return out;
}

BinaryMask erode(const BinaryMask& m, int radius) {
  check_radius(radius);
  const int w = m.width();
  const int h = m.height();
  BinaryMask out(m.size());
  const auto prefix = row_prefix(m);
  std::vector<int> hws;
  for (int dy = -radius; dy <= radius; ++dy) hws.push_back(disk_half_width(radius, dy));
  for (int y = 0; y < h; ++y) {
    if (y - radius < 0 || y + radius >= h) continue;
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      bool keep = true;
      for (int dy = -radius; dy <= radius && keep; ++dy) {
        const int hw = hws[static_cast<std::size_t>(dy + radius)];
        if (x - hw < 0 || x + hw >= w) {
          keep = false;
          break;
        }
        const auto& p = prefix[static_cast<std::size_t>(y + dy)];
        keep = p[x + hw + 1] - p[x - hw] == 2 * hw + 1;
      }
      dst[x] = keep ? 1 : 0;
    }
  }
  return out;
}

BinaryMask boundary_band(const BinaryMask& gt, int radius) {
  if (radius < 1) throw std::invalid_argument("boundary band radius must be >= 1");
  BinaryMask grown = dilate(gt, radius);
  const BinaryMask shrunk = erode(gt, radius);
  auto g = grown.values();
  auto s = shrunk.values();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (g[i] && !s[i]) ? 1 : 0;
  return grown;
}

ScalarMap distance_transform(const BinaryMask& m) {
  // Work on a grid padded by one false pixel on every side.
  const int w = m.width() + 2;
  const int h = m.height() + 2;
  constexpr double big = 1e20;
  std::vector<double> grid(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < m.height(); ++y) {
    const auto row = m.row(y);
    for (int x = 0; x < m.width(); ++x) {
      grid[static_cast<std::size_t>(y + 1) * w + (x + 1)] = row[x] ? big : 0.0;
    }
  }

  const int n = std::max(w, h);
  std::vector<double> f(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);

  for (int x = 0; x < w; ++x) {
    f.resize(static_cast<std::size_t>(h));
    d.resize(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
    edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  f.resize(static_cast<std::size_t>(w));
  d.resize(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = grid[static_cast<std::size_t>(y) * w + x];
    edt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = d[x];
  }

  ScalarMap out(m.size());
  for (int y = 0; y < m.height(); ++y) {
    auto dst = out.row(y);
    for (int x = 0; x < m.width(); ++x) {
      dst[x] = static_cast<float>(std::sqrt(grid[static_cast<std::size_t>(y + 1) * w + (x + 1)]));
    }
  }
  return out;
}

void stamp_disk(ScalarMap& map, Point p, int radius, float value) {
  check_radius(radius);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > radius * radius) continue;
      if (map.in_bounds(p.x + dx, p.y + dy)) map(p.x + dx, p.y + dy) = value;
    }
  }
}

}  // namespace localseg
