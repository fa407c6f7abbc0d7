#include "localseg/slic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>


namespace localseg {
namespace {

float srgb_to_linear(float c) {
  return c <= 0.04045f ? c / 12.92f : std::pow((c + 0.055f) / 1.055f, 2.4f);
}

float lab_f(float t) {
  constexpr float d = 6.0f / 29.0f;
  return t > d * d * d ? std::cbrt(t) : t / (3 * d * d) + 4.0f / 29.0f;
}

struct Center {
  double l, a, b, x, y;
};

using Lab = std::array<float, 3>;

double lab_dist2(const Lab& p, const Center& c) {
  const double dl = p[0] - c.l;
  const double da = p[1] - c.a;
  const double db = p[2] - c.b;
  return dl * dl + da * da + db * db;
}

// Splits every k-means cluster into 4-connected fragments, keeps the largest
// fragment of each cluster and merges the rest into a neighbour.
Superpixels enforce_connectivity(const LabelMap& assignment) {
  const Size size = assignment.size();
  LabelMap frag(size, 0);
  std::vector<int> frag_cluster{0};
  std::vector<std::int64_t> frag_size{0};
  std::vector<Point> stack;
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      if (frag(x, y)) continue;
      const int id = static_cast<int>(frag_cluster.size());
      const int cluster = assignment(x, y);
      frag_cluster.push_back(cluster);
      frag_size.push_back(0);
      stack.push_back({x, y});
      frag(x, y) = id;
      while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        ++frag_size[id];
        const Point nb[4] = {{p.x - 1, p.y}, {p.x + 1, p.y}, {p.x, p.y - 1}, {p.x, p.y + 1}};
        for (const Point q : nb) {
          if (assignment.in_bounds(q) && !frag(q) && assignment(q) == cluster) {
            frag(q) = id;
            stack.push_back(q);
          }
        }
      }
    }
  }

  const int nfrag = static_cast<int>(frag_cluster.size()) - 1;
  std::vector<std::set<int>> adjacent(nfrag + 1);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const int a = frag(x, y);
      if (x + 1 < size.width && frag(x + 1, y) != a) {
        adjacent[a].insert(frag(x + 1, y));
        adjacent[frag(x + 1, y)].insert(a);
      }
      if (y + 1 < size.height && frag(x, y + 1) != a) {
        adjacent[a].insert(frag(x, y + 1));
        adjacent[frag(x, y + 1)].insert(a);
      }
    }
  }

  // owner[f] = retained fragment that f belongs to, 0 while unresolved.
  std::vector<int> owner(nfrag + 1, 0);
  std::vector<int> best_of_cluster;
  for (int f = 1; f <= nfrag; ++f) {
    const auto c = static_cast<std::size_t>(frag_cluster[f]);
    if (best_of_cluster.size() <= c) best_of_cluster.resize(c + 1, 0);
    const int cur = best_of_cluster[c];
    if (cur == 0 || frag_size[f] > frag_size[cur]) best_of_cluster[c] = f;
  }
  std::vector<std::int64_t> owned_size(nfrag + 1, 0);
  for (int f : best_of_cluster) {
    if (f) {
      owner[f] = f;
      owned_size[f] = frag_size[f];
    }
  }

  for (bool pending = true; pending;) {
    pending = false;
    bool progress = false;
    for (int f = 1; f <= nfrag; ++f) {
      if (owner[f]) continue;
      int target = 0;
      for (int g : adjacent[f]) {
        const int o = owner[g];
        if (o && (target == 0 || owned_size[o] > owned_size[target] ||
                  (owned_size[o] == owned_size[target] && o < target))) {
          target = o;
        }
      }
      if (target) {
        owner[f] = target;
        owned_size[target] += frag_size[f];
        progress = true;
      } else {
        pending = true;
      }
    }
    if (pending && !progress) throw std::logic_error("slic: orphan fragment with no resolvable neighbour");
  }

  Superpixels out{LabelMap(size, 0), 0};
  std::vector<int> final_id(nfrag + 1, 0);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const int o = owner[frag(x, y)];
      if (!final_id[o]) final_id[o] = ++out.count;
      out.labels(x, y) = final_id[o];
    }
  }
  return out;
}

}  // namespace

std::array<float, 3> rgb_to_lab(const Rgb& c) {
  const float r = srgb_to_linear(c[0] / 255.0f);
  const float g = srgb_to_linear(c[1] / 255.0f);
  const float b = srgb_to_linear(c[2] / 255.0f);
  const float x = (0.4124564f * r + 0.3575761f * g + 0.1804375f * b) / 0.95047f;
  const float y = 0.2126729f * r + 0.7151522f * g + 0.0721750f * b;
  const float z = (0.0193339f * r + 0.1191920f * g + 0.9503041f * b) / 1.08883f;
  const float fx = lab_f(x);
  const float fy = lab_f(y);
  const float fz = lab_f(z);
  return {116.0f * fy - 16.0f, 500.0f * (fx - fy), 200.0f * (fy - fz)};
}

Superpixels slic(const Image& image, const SlicConfig& cfg) {
  const int k = cfg.pixel_count;
  if (k < 2) throw std::invalid_argument("slic: pixel_count must be >= 2");
  if (cfg.iterations < 1) throw std::invalid_argument("slic: iterations must be >= 1");
  if (image.pixel_count() < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("slic: image " + image.size().str() + " has fewer than " +
                                std::to_string(k) + " pixels");
  }
  const int w = image.width();
  const int h = image.height();
  const double n = static_cast<double>(w) * h;
  const double s = std::sqrt(n / k);

  Raster<Lab> lab(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) lab(x, y) = rgb_to_lab(image(x, y));
  }

  const int nx = std::max(1, static_cast<int>(std::lround(std::sqrt(double(k) * w / h))));
  const int ny = std::max(1, static_cast<int>(std::lround(double(k) / nx)));
  const double step_x = double(w) / nx;
  const double step_y = double(h) / ny;

  auto gradient = [&](int x, int y) {
    const auto& l = lab(std::max(x - 1, 0), y);
    const auto& r = lab(std::min(x + 1, w - 1), y);
    const auto& u = lab(x, std::max(y - 1, 0));
    const auto& d = lab(x, std::min(y + 1, h - 1));
    double g = 0;
    for (int c = 0; c < 3; ++c) g += (r[c] - l[c]) * (r[c] - l[c]) + (d[c] - u[c]) * (d[c] - u[c]);
    return g;
  };

  std::vector<Center> centers;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int cx = std::min(w - 1, static_cast<int>((i + 0.5) * step_x));
      const int cy = std::min(h - 1, static_cast<int>((j + 0.5) * step_y));
      int bx = cx;
      int by = cy;
      double best = std::numeric_limits<double>::max();
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int px = cx + dx;
          const int py = cy + dy;
          if (px < 0 || py < 0 || px >= w || py >= h) continue;
          const double g = gradient(px, py);
          if (g < best) {
            best = g;
            bx = px;
            by = py;
          }
        }
      }
      const auto& c = lab(bx, by);
      centers.push_back({c[0], c[1], c[2], double(bx), double(by)});
    }
  }

  // Initial assignment: the grid cell, so pixels no window reaches stay labeled.
  LabelMap assignment(w, h);
  for (int y = 0; y < h; ++y) {
    const int j = std::min(ny - 1, static_cast<int>(y / step_y));
    for (int x = 0; x < w; ++x) {
      const int i = std::min(nx - 1, static_cast<int>(x / step_x));
      assignment(x, y) = j * nx + i + 1;
    }
  }

  const double spatial = cfg.compactness / s;
  const int reach = static_cast<int>(std::ceil(std::max({s, step_x, step_y})));
  ScalarMap dist(w, h);
  for (int it = 0; it < cfg.iterations; ++it) {
    dist.fill(std::numeric_limits<float>::max());
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
      const Center& c = centers[ci];
      const int x0 = std::max(0, static_cast<int>(c.x) - reach);
      const int x1 = std::min(w - 1, static_cast<int>(c.x) + reach);
      const int y0 = std::max(0, static_cast<int>(c.y) - reach);
      const int y1 = std::min(h - 1, static_cast<int>(c.y) + reach);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double dxy = std::hypot(x - c.x, y - c.y);
          const auto d = static_cast<float>(std::sqrt(lab_dist2(lab(x, y), c)) + spatial * dxy);
          if (d < dist(x, y)) {
            dist(x, y) = d;
            assignment(x, y) = static_cast<int>(ci) + 1;
          }
        }
      }
    }
    std::vector<std::array<double, 6>> acc(centers.size(), {0, 0, 0, 0, 0, 0});
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        auto& a = acc[static_cast<std::size_t>(assignment(x, y) - 1)];
        const auto& p = lab(x, y);
        a[0] += p[0];
        a[1] += p[1];
        a[2] += p[2];
        a[3] += x;
        a[4] += y;
        a[5] += 1;
      }
    }
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
      const auto& a = acc[ci];
      if (a[5] > 0) centers[ci] = {a[0] / a[5], a[1] / a[5], a[2] / a[5], a[3] / a[5], a[4] / a[5]};
    }
  }
  return enforce_connectivity(assignment);
}

}  // namespace localseg
