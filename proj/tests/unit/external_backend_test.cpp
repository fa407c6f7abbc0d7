#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "localseg/external_backend.hpp"
#include "localseg/masks.hpp"
#include "localseg/session.hpp"

using namespace localseg;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures{LOCALSEG_FIXTURES};

SegmentorInput zero_input(Size s) {
  SegmentorInput in;
  in.crop = {BBox::of(s), s, 1.0};
  for (auto& p : in.image) p = ScalarMap(s, 0.0f);
  in.prev_mask = in.pos_clicks = in.neg_clicks = ScalarMap(s, 0.0f);
  return in;
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const BackendError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("io spec parsing") {
  const IoSpec spec = IoSpec::load(kFixtures / "tiny_io_spec.json");
  CHECK(spec.segmentor.inputs.at("prev_mask") == "prev");
  CHECK(spec.segmentor.outputs.at("feature") == "feat");
  CHECK(spec.segmentor.std[2] == doctest::Approx(0.225f));
  REQUIRE(spec.refiner);
  CHECK(spec.refiner->model == kFixtures / "tiny_refiner.onnx");

  CHECK(error_of([] { (void)IoSpec::parse(R"({"segmentor": {"inputs": {}, "outputs": {}}})"); })
            .find("missing role 'image'") != std::string::npos);
  CHECK(error_of([] { (void)IoSpec::parse("not json"); }).find("io_spec") != std::string::npos);
  CHECK(error_of([] {
          (void)IoSpec::parse(R"({"segmentor": {"inputs": {"image":"a","prev_mask":"b","pos_clicks":"c",
              "neg_clicks":"d"}, "outputs": {"logits":"l"}, "layout": "NHWC"}})");
        }).find("NHWC") != std::string::npos);
  CHECK_THROWS_AS((void)IoSpec::load(kFixtures / "absent.json"), BackendError);
}

TEST_CASE("external backend runs the exported networks") {
  if (!external_backend_available()) {
    MESSAGE("built without an ONNX runtime");
    return;
  }
  const auto spec = IoSpec::load(kFixtures / "tiny_io_spec.json");
  const auto backend = load_external_backend(kFixtures / "tiny_segmentor.onnx", spec, ModelSeries::s2());
  CHECK(backend->name() == "external");

  SegmentorInput in = zero_input({256, 256});
  for (int y = 100; y < 140; ++y) {
    for (int x = 50; x < 90; ++x) in.prev_mask(x, y) = 1.0f;
  }
  in.neg_clicks(60, 110) = 1.0f;
  const CoarseOutput out = backend->segment(in);
  CHECK(out.logits(70, 120) == doctest::Approx(10.0f));
  CHECK(out.logits(10, 10) == doctest::Approx(-10.0f));
  CHECK(out.logits(60, 110) == doctest::Approx(-10.0f));
  REQUIRE(out.feature.size() == 1);
  CHECK(out.feature[0].size() == Size{64, 64});

  RefinerInput rin;
  rin.crop = {{0, 0, 256, 256}, {256, 256}, 1.0};
  for (auto& p : rin.image) p = ScalarMap({256, 256}, 0.3f);
  rin.pos_clicks = rin.neg_clicks = ScalarMap({256, 256}, 0.0f);
  rin.pos_clicks(5, 5) = 1.0f;
  rin.roi_logits = ScalarMap({256, 256}, -4.0f);
  const RefineOutput r = backend->refine(rin);
  CHECK(r.detail(100, 100) == doctest::Approx(-4.0f));
  CHECK(r.boundary(5, 5) == doctest::Approx(10.0f));
  CHECK(r.boundary(6, 6) == doctest::Approx(-10.0f));
}

TEST_CASE("external backend reports contract violations") {
  if (!external_backend_available()) return;
  const auto spec = IoSpec::load(kFixtures / "tiny_io_spec.json");

  const std::string rank = error_of([&] {
    (void)load_external_backend(kFixtures / "bad_rank_segmentor.onnx", spec, ModelSeries::s2());
  });
  CHECK(rank.find("logits") != std::string::npos);
  CHECK(rank.find("expected") != std::string::npos);
  CHECK(rank.find("[1,65536]") != std::string::npos);

  CHECK(error_of([&] { (void)load_external_backend(kFixtures / "missing.onnx", spec, ModelSeries::s2()); })
            .find("not found") != std::string::npos);

  IoSpec wrong_out = spec;
  wrong_out.segmentor.outputs["logits"] = "scores";
  CHECK(error_of([&] { (void)load_external_backend(kFixtures / "tiny_segmentor.onnx", wrong_out, ModelSeries::s2()); })
            .find("'scores'") != std::string::npos);

  IoSpec wrong_in = spec;
  wrong_in.segmentor.inputs["prev_mask"] = "previous";
  CHECK_FALSE(
      error_of([&] { (void)load_external_backend(kFixtures / "tiny_segmentor.onnx", wrong_in, ModelSeries::s2()); })
          .empty());
}

TEST_CASE("external backend without a refiner leaves coarse logits untouched") {
  if (!external_backend_available()) return;
  IoSpec spec = IoSpec::load(kFixtures / "tiny_io_spec.json");
  spec.refiner.reset();
  const auto backend = load_external_backend(kFixtures / "tiny_segmentor.onnx", spec, ModelSeries::s2());
  RefinerInput rin;
  rin.crop = {{0, 0, 256, 256}, {256, 256}, 1.0};
  for (auto& p : rin.image) p = ScalarMap({256, 256}, 0.0f);
  rin.pos_clicks = rin.neg_clicks = ScalarMap({256, 256}, 0.0f);
  rin.roi_logits = ScalarMap({256, 256}, 2.5f);
  const RefineOutput r = backend->refine(rin);
  const ScalarMap fused = fuse(r.boundary, r.detail, rin.roi_logits);
  CHECK(fused(3, 3) == doctest::Approx(2.5f));
}

TEST_CASE("external backend drives a session like any other backend") {
  if (!external_backend_available()) return;
  BackendOptions opts;
  opts.model_path = kFixtures / "tiny_segmentor.onnx";
  opts.io_spec_path = kFixtures / "tiny_io_spec.json";
  const auto backend = make_backend("external", opts);
  Image img(200, 150);
  img.fill({90, 120, 30});
  Session s(img, std::nullopt, ModelSeries::s2(), backend);
  const ClickRecord& r = s.add_click(Polarity::positive, {100, 70});
  CHECK(s.mask()(100, 70) == 1);
  CHECK(r.updated_region);
  CHECK(count_true(s.mask()) < 100);  // the tiny network only marks the click disk
}
