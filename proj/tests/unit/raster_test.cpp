#include <doctest.h>

#include <random>

#include "localseg/masks.hpp"
#include "localseg/raster.hpp"
#include "oracles.hpp"

using namespace localseg;

TEST_CASE("raster rejects empty dimensions") {
  CHECK_THROWS_AS(BinaryMask(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(ScalarMap(4, -1), std::invalid_argument);
  const BinaryMask m(3, 2, 1);
  CHECK(m.pixel_count() == 6);
  CHECK(m.bounds() == BBox{0, 0, 3, 2});
  CHECK(BinaryMask().empty());
}

TEST_CASE("bbox is half-open") {
  const BBox b{2, 3, 5, 7};
  CHECK(b.width() == 3);
  CHECK(b.height() == 4);
  CHECK(b.area() == 12);
  CHECK(b.contains(Point{2, 3}));
  CHECK_FALSE(b.contains(Point{5, 3}));
  CHECK(b.intersect({4, 0, 10, 4}) == BBox{4, 3, 5, 4});
  CHECK(b.unite(BBox::of(Point{0, 0})) == BBox{0, 0, 5, 7});
  CHECK(BBox{3, 3, 3, 9}.empty());
  CHECK(BBox{3, 3, 3, 9}.area() == 0);
}

TEST_CASE("polarity round trip") {
  CHECK(parse_polarity("positive") == Polarity::positive);
  CHECK(parse_polarity("neg") == Polarity::negative);
  CHECK(to_string(Polarity::negative) == "negative");
  CHECK_THROWS((void)parse_polarity("sideways"));
}

TEST_CASE("iou examples") {
  const Size s{4, 4};
  const BinaryMask a = oracle::rect_mask(s, {0, 0, 2, 2});
  const BinaryMask b = oracle::rect_mask(s, {1, 0, 3, 2});
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, oracle::rect_mask(s, {2, 2, 4, 4})) == 0.0);
  CHECK(iou(a, b) == doctest::Approx(2.0 / 6.0));
  CHECK(iou(BinaryMask(s, 0), BinaryMask(s, 0)) == 1.0);
  CHECK_THROWS_AS((void)iou(a, BinaryMask(3, 4)), DimensionMismatch);
}

TEST_CASE("iou matches a direct count and is symmetric") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    const int w = 1 + static_cast<int>(rng() % 70);
    const int h = 1 + static_cast<int>(rng() % 9);
    const BinaryMask a = oracle::random_mask(w, h, 0.4, rng);
    const BinaryMask b = oracle::random_mask(w, h, 0.4, rng);
    CHECK(iou(a, b) == doctest::Approx(oracle::brute_iou(a, b)).epsilon(1e-12));
    CHECK(iou(a, b) == iou(b, a));
  }
}

TEST_CASE("iou is monotone under adding shared pixels") {
  std::mt19937_64 rng(8);
  BinaryMask a = oracle::random_mask(16, 16, 0.3, rng);
  BinaryMask b = oracle::random_mask(16, 16, 0.3, rng);
  double last = iou(a, b);
  for (int i = 0; i < 256; ++i) {
    a.values()[i] = b.values()[i] = 1;
    const double now = iou(a, b);
    CHECK(now >= last - 1e-15);
    last = now;
  }
  CHECK(last == 1.0);
}

TEST_CASE("xor_diff examples") {
  const Size s{4, 4};
  const BinaryMask left = oracle::rect_mask(s, {0, 0, 2, 4});
  const BinaryMask top = oracle::rect_mask(s, {0, 0, 4, 2});
  CHECK(count_true(xor_diff(left, left)) == 0);
  CHECK(count_true(xor_diff(BinaryMask(s, 1), BinaryMask(s, 0))) == 16);
  const BinaryMask d = xor_diff(left, top);
  CHECK(count_true(d) == 8);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) CHECK(d(x, y) == ((x < 2) != (y < 2) ? 1 : 0));
  }
}

TEST_CASE("mask_bbox and binarize") {
  BinaryMask m(6, 5, 0);
  CHECK_FALSE(mask_bbox(m));
  m(1, 2) = 1;
  m(4, 3) = 1;
  CHECK(*mask_bbox(m) == BBox{1, 2, 5, 4});
  ScalarMap s(3, 1);
  s(0, 0) = -0.5f;
  s(1, 0) = 0.0f;
  s(2, 0) = 0.25f;
  const BinaryMask b = binarize(s);
  CHECK(b(0, 0) == 0);
  CHECK(b(1, 0) == 0);
  CHECK(b(2, 0) == 1);
  CHECK(to_scalar(b)(2, 0) == 1.0f);
}
