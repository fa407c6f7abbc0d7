#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace localseg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two rasters that must share a frame do not.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

struct Size {
  int width = 0;
  int height = 0;

  [[nodiscard]] std::int64_t area() const { return std::int64_t{width} * height; }
  [[nodiscard]] std::string str() const;
  friend bool operator==(const Size&, const Size&) = default;
};

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Integer pixel box, half-open on the max edge.
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  [[nodiscard]] int width() const { return x1 - x0; }
  [[nodiscard]] int height() const { return y1 - y0; }
  [[nodiscard]] std::int64_t area() const {
    return empty() ? 0 : std::int64_t{width()} * height();
  }
  [[nodiscard]] bool empty() const { return x1 <= x0 || y1 <= y0; }
  [[nodiscard]] bool contains(Point p) const {
    return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1;
  }
  [[nodiscard]] bool contains(const BBox& o) const {
    return o.x0 >= x0 && o.y0 >= y0 && o.x1 <= x1 && o.y1 <= y1;
  }
  [[nodiscard]] BBox intersect(const BBox& o) const {
    return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
  }
  [[nodiscard]] BBox unite(const BBox& o) const {
    if (empty()) return o;
    if (o.empty()) return *this;
    return {std::min(x0, o.x0), std::min(y0, o.y0), std::max(x1, o.x1), std::max(y1, o.y1)};
  }
  [[nodiscard]] Size size() const { return {width(), height()}; }
  [[nodiscard]] std::string str() const;

  static BBox of(Size s) { return {0, 0, s.width, s.height}; }
  static BBox of(Point p) { return {p.x, p.y, p.x + 1, p.y + 1}; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

enum class Polarity : std::uint8_t { positive, negative };

[[nodiscard]] std::string_view to_string(Polarity p);
[[nodiscard]] Polarity parse_polarity(std::string_view s);

struct Click {
  Polarity polarity = Polarity::positive;
  int x = 0;
  int y = 0;
  int ordinal = 0;

  [[nodiscard]] Point point() const { return {x, y}; }
  [[nodiscard]] bool positive() const { return polarity == Polarity::positive; }
  friend bool operator==(const Click&, const Click&) = default;
};

/// Row-major 2-D buffer. Default construction gives an empty 0x0 raster;
/// every other raster has width, height >= 1.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{}) : size_{width, height} {
    if (width < 1 || height < 1) {
      throw std::invalid_argument("raster dimensions must be >= 1, got " + size_.str());
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  explicit Raster(Size s, T fill = T{}) : Raster(s.width, s.height, fill) {}

  [[nodiscard]] int width() const { return size_.width; }
  [[nodiscard]] int height() const { return size_.height; }
  [[nodiscard]] Size size() const { return size_; }
  [[nodiscard]] BBox bounds() const { return BBox::of(size_); }
  [[nodiscard]] bool empty() const { return data_.empty(); }
  [[nodiscard]] std::size_t pixel_count() const { return data_.size(); }

  [[nodiscard]] bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < size_.width && y < size_.height;
  }
  [[nodiscard]] bool in_bounds(Point p) const { return in_bounds(p.x, p.y); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator()(Point p) { return (*this)(p.x, p.y); }
  const T& operator()(Point p) const { return (*this)(p.x, p.y); }

  [[nodiscard]] std::span<T> row(int y) {
    return {data_.data() + static_cast<std::size_t>(y) * size_.width,
            static_cast<std::size_t>(size_.width)};
  }
  [[nodiscard]] std::span<const T> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * size_.width,
            static_cast<std::size_t>(size_.width)};
  }
  [[nodiscard]] std::span<T> values() { return data_; }
  [[nodiscard]] std::span<const T> values() const { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  [[nodiscard]] std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(size_.width) +
           static_cast<std::size_t>(x);
  }

  Size size_{};
  std::vector<T> data_;
};

/// Pixels are 0 or 1.
using BinaryMask = Raster<std::uint8_t>;
using ScalarMap = Raster<float>;
/// 0 = background for component labelings; superpixel maps use 1..K.
using LabelMap = Raster<std::int32_t>;
using Rgb = std::array<std::uint8_t, 3>;
using Image = Raster<Rgb>;

/// C channels sharing one resolution.
using ScalarStack = std::vector<ScalarMap>;

inline void require_same_size(Size a, Size b, const char* what) {
  if (!(a == b)) {
    throw DimensionMismatch(std::string(what) + ": " + a.str() + " vs " + b.str());
  }
}

}  // namespace localseg
