#include <doctest.h>

#include <random>

#include "localseg/components.hpp"
#include "oracles.hpp"

using namespace localseg;

TEST_CASE("component examples") {
  BinaryMask m(4, 4, 0);
  auto c = connected_components(m);
  CHECK(c.count == 0);
  CHECK_FALSE(largest_component(c.labels));

  m(0, 0) = 1;
  m(3, 3) = 1;
  c = connected_components(m, Connectivity::eight);
  CHECK(c.count == 2);
  CHECK(c.labels(0, 0) == 1);
  CHECK(c.labels(3, 3) == 2);
  CHECK(*component_containing(c.labels, {3, 3}) == 2);
  CHECK_FALSE(component_containing(c.labels, {1, 1}));

  BinaryMask diag(4, 4, 0);
  diag(0, 0) = diag(1, 1) = 1;
  CHECK(connected_components(diag, Connectivity::four).count == 2);
  CHECK(connected_components(diag, Connectivity::eight).count == 1);
}

TEST_CASE("largest component and tie-break") {
  BinaryMask m(9, 1, 0);
  for (int x : {0, 1, 2, 4, 5, 6, 7, 8}) m(x, 0) = 1;
  m(3, 0) = 0;
  auto c = connected_components(m);
  CHECK(component_sizes(c.labels) == std::vector<std::int64_t>{1, 3, 5});
  CHECK(*largest_component(c.labels) == 2);

  BinaryMask tie(9, 1, 0);
  for (int x : {0, 1, 2, 3, 5, 6, 7, 8}) tie(x, 0) = 1;
  CHECK(*largest_component(connected_components(tie).labels) == 1);
}

TEST_CASE("component boxes and masks") {
  BinaryMask m = oracle::rect_mask({10, 8}, {1, 1, 4, 3});
  m(8, 6) = 1;
  auto c = connected_components(m);
  auto boxes = component_boxes(c.labels, c.count);
  CHECK(boxes[1] == BBox{1, 1, 4, 3});
  CHECK(boxes[2] == BBox{8, 6, 9, 7});
  const BinaryMask only2 = component_mask(c.labels, 2);
  CHECK(only2(8, 6) == 1);
  CHECK(only2(1, 1) == 0);
}

TEST_CASE("matches flood fill on every 4x4 mask") {
  for (std::uint32_t bits = 0; bits < (1u << 16); ++bits) {
    BinaryMask m(4, 4);
    for (int i = 0; i < 16; ++i) m.values()[i] = (bits >> i) & 1u;
    for (bool eight : {false, true}) {
      int expected_count = 0;
      const LabelMap expected = oracle::flood_fill_labels(m, eight, &expected_count);
      const auto got = connected_components(m, eight ? Connectivity::eight : Connectivity::four);
      REQUIRE(got.count == expected_count);
      REQUIRE(got.labels == expected);
    }
  }
}

TEST_CASE("matches flood fill on random 32x32 masks") {
  std::mt19937_64 rng(12345);
  for (int t = 0; t < 1000; ++t) {
    const double density = 0.2 + 0.6 * (t % 7) / 6.0;
    const BinaryMask m = oracle::random_mask(32, 32, density, rng);
    for (bool eight : {false, true}) {
      int n = 0;
      const LabelMap expected = oracle::flood_fill_labels(m, eight, &n);
      const auto got = connected_components(m, eight ? Connectivity::eight : Connectivity::four);
      REQUIRE(got.count == n);
      REQUIRE(got.labels == expected);
    }
  }
}

TEST_CASE("non-square and degenerate shapes") {
  std::mt19937_64 rng(99);
  for (auto [w, h] : {std::pair{1, 1}, {1, 40}, {40, 1}, {3, 17}, {64, 5}}) {
    const BinaryMask m = oracle::random_mask(w, h, 0.5, rng);
    int n = 0;
    const LabelMap expected = oracle::flood_fill_labels(m, true, &n);
    CHECK(connected_components(m).labels == expected);
  }
}
