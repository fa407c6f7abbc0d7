#include "localseg/components.hpp"

#include <numeric>

namespace localseg {
namespace {

class UnionFind {
 public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  int unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (a < b) {
      parent_[b] = a;
      return a;
    }
    parent_[a] = b;
    return b;
  }
  [[nodiscard]] std::size_t size() const { return parent_.size(); }

 private:
  std::vector<int> parent_{0};
};

}  // namespace

Components connected_components(const BinaryMask& m, Connectivity conn) {
  if (m.empty()) return {};
  const int w = m.width();
  const int h = m.height();
  const bool diag = conn == Connectivity::eight;

  LabelMap provisional(w, h, 0);
  UnionFind uf;
  for (int y = 0; y < h; ++y) {
    const auto src = m.row(y);
    auto cur = provisional.row(y);
    for (int x = 0; x < w; ++x) {
      if (!src[x]) continue;
      int label = 0;
      auto join = [&](int n) {
        if (n == 0) return;
        label = label == 0 ? uf.find(n) : uf.unite(label, n);
      };
      if (x > 0) join(cur[x - 1]);
      if (y > 0) {
        const auto up = provisional.row(y - 1);
        join(up[x]);
        if (diag) {
          if (x > 0) join(up[x - 1]);
          if (x + 1 < w) join(up[x + 1]);
        }
      }
      cur[x] = label == 0 ? uf.make() : label;
    }
  }

  // Renumber roots in the order their first pixel appears.
  std::vector<int> final_id(uf.size(), 0);
  int next = 0;
  for (auto& v : provisional.values()) {
    if (v == 0) continue;
    const int root = uf.find(v);
    if (final_id[root] == 0) final_id[root] = ++next;
    v = final_id[root];
  }
  return {std::move(provisional), next};
}

std::optional<int> component_containing(const LabelMap& labels, Point p) {
  if (!labels.in_bounds(p)) return std::nullopt;
  const int v = labels(p);
  if (v == 0) return std::nullopt;
  return v;
}

std::vector<std::int64_t> component_sizes(const LabelMap& labels) {
  std::vector<std::int64_t> sizes(1, 0);
  for (int v : labels.values()) {
    if (static_cast<std::size_t>(v) >= sizes.size()) sizes.resize(static_cast<std::size_t>(v) + 1, 0);
    ++sizes[static_cast<std::size_t>(v)];
  }
  return sizes;
}

std::optional<int> largest_component(const LabelMap& labels) {
  const auto sizes = component_sizes(labels);
  std::optional<int> best;
  for (std::size_t id = 1; id < sizes.size(); ++id) {
    if (sizes[id] == 0) continue;
    if (!best || sizes[id] > sizes[static_cast<std::size_t>(*best)]) best = static_cast<int>(id);
  }
  return best;
}

BinaryMask component_mask(const LabelMap& labels, int id) {
  BinaryMask out(labels.size());
  auto src = labels.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == id ? 1 : 0;
  return out;
}

std::vector<BBox> component_boxes(const LabelMap& labels, int count) {
  std::vector<BBox> boxes(static_cast<std::size_t>(count) + 1,
                          BBox{labels.width(), labels.height(), 0, 0});
  for (int y = 0; y < labels.height(); ++y) {
    const auto row = labels.row(y);
    for (int x = 0; x < labels.width(); ++x) {
      const int v = row[x];
      if (v <= 0 || v > count) continue;
      auto& b = boxes[static_cast<std::size_t>(v)];
      b.x0 = std::min(b.x0, x);
      b.y0 = std::min(b.y0, y);
      b.x1 = std::max(b.x1, x + 1);
      b.y1 = std::max(b.y1, y + 1);
    }
  }
  boxes[0] = {};
  return boxes;
}

}  // namespace localseg
