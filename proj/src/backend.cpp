#include "localseg/backend.hpp"

#include <cmath>

#include "localseg/external_backend.hpp"
#include "localseg/kernels.hpp"
#include "localseg/masks.hpp"
#include "localseg/morphology.hpp"
#include "localseg/rng.hpp"

namespace localseg {
namespace {

void expect_size(const ScalarMap& m, Size want, const char* what) {
  if (!(m.size() == want)) {
    throw BackendError(std::string(what) + ": expected " + want.str() + ", got " + m.size().str());
  }
}

void expect_finite(const ScalarMap& m, const char* what) {
  for (float v : m.values()) {
    if (!std::isfinite(v)) throw BackendError(std::string(what) + ": non-finite value");
  }
}

ScalarMap logits_from_mask(const BinaryMask& m, float magnitude) {
  ScalarMap out(m.size());
  auto src = m.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? magnitude : -magnitude;
  return out;
}

ScalarMap avg_pool(const ScalarMap& m, int stride) {
  const int ow = (m.width() + stride - 1) / stride;
  const int oh = (m.height() + stride - 1) / stride;
  ScalarMap out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double sum = 0;
      int n = 0;
      for (int dy = 0; dy < stride && y * stride + dy < m.height(); ++dy) {
        for (int dx = 0; dx < stride && x * stride + dx < m.width(); ++dx) {
          sum += m(x * stride + dx, y * stride + dy);
          ++n;
        }
      }
      out(x, y) = static_cast<float>(sum / n);
    }
  }
  return out;
}

std::uint64_t hash_map(std::uint64_t h, const ScalarMap& m) {
  std::uint64_t acc = 0;
  auto v = m.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0f) acc = hash_combine(acc, i);
  }
  return hash_combine(h, acc);
}

std::uint64_t hash_geometry(std::uint64_t h, const CropSpec& c) {
  for (int v : {c.box.x0, c.box.y0, c.box.x1, c.box.y1, c.out.width, c.out.height}) {
    h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
  }
  return h;
}

// Distance transform of `m` with the outside of the raster replicating the
// edge pixels for `margin` pixels.
ScalarMap edge_replicated_distance(const BinaryMask& m, int margin) {
  BinaryMask padded(m.width() + 2 * margin, m.height() + 2 * margin);
  for (int y = 0; y < padded.height(); ++y) {
    const int sy = std::clamp(y - margin, 0, m.height() - 1);
    for (int x = 0; x < padded.width(); ++x) {
      const int sx = std::clamp(x - margin, 0, m.width() - 1);
      padded(x, y) = m(sx, sy);
    }
  }
  const ScalarMap dt = distance_transform(padded);
  ScalarMap out(m.size());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) out(x, y) = dt(x + margin, y + margin);
  }
  return out;
}

// Smooth value noise in [-1, 1] with lattice spacing `cell`.
ScalarMap value_noise(Size size, int cell, Rng& rng) {
  const int gw = size.width / cell + 2;
  const int gh = size.height / cell + 2;
  std::vector<float> lattice(static_cast<std::size_t>(gw) * gh);
  for (auto& v : lattice) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  auto at = [&](int gx, int gy) { return lattice[static_cast<std::size_t>(gy) * gw + gx]; };
  auto smooth = [](float t) { return t * t * (3.0f - 2.0f * t); };
  ScalarMap out(size);
  for (int y = 0; y < size.height; ++y) {
    const int gy = y / cell;
    const float ty = smooth(static_cast<float>(y % cell) / cell);
    for (int x = 0; x < size.width; ++x) {
      const int gx = x / cell;
      const float tx = smooth(static_cast<float>(x % cell) / cell);
      const float top = at(gx, gy) + (at(gx + 1, gy) - at(gx, gy)) * tx;
      const float bot = at(gx, gy + 1) + (at(gx + 1, gy + 1) - at(gx, gy + 1)) * tx;
      out(x, y) = top + (bot - top) * ty;
    }
  }
  return out;
}

constexpr int kNoiseCell = 8;

// Ground truth whose boundary is displaced by radius * noise(x, y).
BinaryMask wobble(const BinaryMask& gt, double radius, Rng& rng) {
  if (radius <= 0) return gt;
  const int margin = static_cast<int>(std::ceil(radius)) + 2;
  BinaryMask inverse(gt.size());
  {
    auto s = gt.values();
    auto d = inverse.values();
    for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] ? 0 : 1;
  }
  const ScalarMap inside = edge_replicated_distance(gt, margin);
  const ScalarMap outside = edge_replicated_distance(inverse, margin);
  const ScalarMap noise = value_noise(gt.size(), kNoiseCell, rng);
  BinaryMask out(gt.size());
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      const double signed_dist = gt(x, y) ? inside(x, y) - 0.5 : -(outside(x, y) - 0.5);
      out(x, y) = signed_dist + radius * noise(x, y) > 0 ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

void validate_input(const SegmentorInput& in) {
  const Size s = in.crop.out;
  for (const auto& p : in.image) expect_size(p, s, "segmentor image");
  expect_size(in.prev_mask, s, "segmentor prev_mask");
  expect_size(in.pos_clicks, s, "segmentor pos_clicks");
  expect_size(in.neg_clicks, s, "segmentor neg_clicks");
}

void validate_output(const CoarseOutput& out, Size input) {
  expect_size(out.logits, input, "segmentor logits");
  expect_finite(out.logits, "segmentor logits");
  for (const auto& ch : out.feature) {
    if (ch.size() != out.feature.front().size()) {
      throw BackendError("segmentor feature: channels disagree in size");
    }
    if (input.width % ch.width() != 0 || input.height % ch.height() != 0) {
      throw BackendError("segmentor feature: resolution " + ch.size().str() +
                         " does not divide input " + input.str());
    }
    expect_finite(ch, "segmentor feature");
  }
}

void validate_input(const RefinerInput& in) {
  const Size s = in.crop.out;
  for (const auto& p : in.image) expect_size(p, s, "refiner image");
  expect_size(in.pos_clicks, s, "refiner pos_clicks");
  expect_size(in.neg_clicks, s, "refiner neg_clicks");
  expect_size(in.roi_logits, s, "refiner roi_logits");
}

void validate_output(const RefineOutput& out, Size input) {
  expect_size(out.detail, input, "refiner detail");
  expect_size(out.boundary, input, "refiner boundary");
  expect_finite(out.detail, "refiner detail");
  expect_finite(out.boundary, "refiner boundary");
}

ScalarMap fuse(const ScalarMap& boundary, const ScalarMap& detail, const ScalarMap& coarse) {
  require_same_size(boundary.size(), detail.size(), "fuse");
  require_same_size(boundary.size(), coarse.size(), "fuse");
  ScalarMap out(boundary.size());
  kernels::fuse(boundary.values(), detail.values(), coarse.values(), out.values());
  return out;
}

BinaryMask boundary_target(const BinaryMask& gt, int factor) {
  if (factor < 1) throw std::invalid_argument("boundary_target factor must be >= 1");
  const Size small{(gt.width() + factor - 1) / factor, (gt.height() + factor - 1) / factor};
  const BinaryMask round_trip = resize(resize(gt, small), gt.size());
  return xor_diff(gt, round_trip);
}

ScalarStack oracle_feature(const ScalarMap& logits, const RgbPlanes& image, const ScalarMap& pos,
                           const ScalarMap& neg) {
  ScalarMap mean(logits.size());
  for (int y = 0; y < mean.height(); ++y) {
    for (int x = 0; x < mean.width(); ++x) {
      mean(x, y) = (image[0](x, y) + image[1](x, y) + image[2](x, y)) / 3.0f;
    }
  }
  ScalarStack f;
  f.push_back(avg_pool(logits, kOracleFeatureStride));
  f.push_back(avg_pool(mean, kOracleFeatureStride));
  f.push_back(avg_pool(pos, kOracleFeatureStride));
  f.push_back(avg_pool(neg, kOracleFeatureStride));
  return f;
}

OracleBackend::OracleBackend(BinaryMask gt) : gt_(std::move(gt)) {}

CoarseOutput OracleBackend::segment(const SegmentorInput& in) const {
  validate_input(in);
  CoarseOutput out;
  out.logits = logits_from_mask(crop_resize(gt_, in.crop), kOracleLogit);
  out.feature = oracle_feature(out.logits, in.image, in.pos_clicks, in.neg_clicks);
  return out;
}

RefineOutput OracleBackend::refine(const RefinerInput& in) const {
  validate_input(in);
  const BinaryMask local = crop_resize(gt_, in.crop);
  return {logits_from_mask(local, kOracleLogit),
          logits_from_mask(boundary_target(local), kOracleLogit)};
}

NoisyOracleBackend::NoisyOracleBackend(BinaryMask gt, NoiseConfig cfg)
    : gt_(std::move(gt)), cfg_(cfg) {
  if (cfg_.boundary_radius < 0) throw std::invalid_argument("boundary radius must be >= 0");
  if (cfg_.blob_rate < 0 || cfg_.blob_rate > 1) throw std::invalid_argument("blob rate must be in [0, 1]");
}

CoarseOutput NoisyOracleBackend::segment(const SegmentorInput& in) const {
  validate_input(in);
  std::uint64_t h = hash_geometry(hash_combine(cfg_.seed, 0x5e6), in.crop);
  h = hash_map(h, in.prev_mask);
  h = hash_map(h, in.pos_clicks);
  h = hash_map(h, in.neg_clicks);
  Rng rng(h);

  const BinaryMask local = crop_resize(gt_, in.crop);
  BinaryMask pred = wobble(local, cfg_.boundary_radius, rng);
  if (rng.bernoulli(cfg_.blob_rate)) {
    const double object = std::max<double>(64.0, static_cast<double>(count_true(local)));
    const int radius = std::max(3, static_cast<int>(0.25 * std::sqrt(object)));
    const Point c{static_cast<int>(rng.uniform_int(0, pred.width() - 1)),
                  static_cast<int>(rng.uniform_int(0, pred.height() - 1))};
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx) {
        if (dx * dx + dy * dy <= radius * radius && pred.in_bounds(c.x + dx, c.y + dy)) {
          pred(c.x + dx, c.y + dy) = 1;
        }
      }
    }
  }

  CoarseOutput out;
  out.logits = logits_from_mask(pred, kOracleLogit);
  out.feature = oracle_feature(out.logits, in.image, in.pos_clicks, in.neg_clicks);
  return out;
}

RefineOutput NoisyOracleBackend::refine(const RefinerInput& in) const {
  validate_input(in);
  std::uint64_t h = hash_geometry(hash_combine(cfg_.seed, 0x4ef), in.crop);
  h = hash_map(h, in.pos_clicks);
  h = hash_map(h, in.neg_clicks);
  Rng rng(h);
  const BinaryMask local = crop_resize(gt_, in.crop);
  return {logits_from_mask(wobble(local, cfg_.boundary_radius, rng), kOracleLogit),
          logits_from_mask(boundary_target(local), kOracleLogit)};
}

CoarseOutput ConstantBackend::segment(const SegmentorInput& in) const {
  validate_input(in);
  CoarseOutput out;
  out.logits = ScalarMap(in.crop.out, logit_);
  out.feature = oracle_feature(out.logits, in.image, in.pos_clicks, in.neg_clicks);
  return out;
}

RefineOutput ConstantBackend::refine(const RefinerInput& in) const {
  validate_input(in);
  return {ScalarMap(in.crop.out, logit_), ScalarMap(in.crop.out, -kOracleLogit)};
}

bool backend_needs_ground_truth(std::string_view name) {
  return name == "oracle" || name == "noisy";
}

std::shared_ptr<const Backend> make_backend(std::string_view name, const BackendOptions& opts) {
  if (backend_needs_ground_truth(name) && !opts.gt) {
    throw std::invalid_argument("backend '" + std::string(name) + "' needs a ground-truth mask");
  }
  if (name == "oracle") return std::make_shared<OracleBackend>(*opts.gt);
  if (name == "noisy") return std::make_shared<NoisyOracleBackend>(*opts.gt, opts.noise);
  if (name == "constant" || name == "empty") return std::make_shared<ConstantBackend>();
  if (name == "external") {
    auto spec_path = opts.io_spec_path;
    if (spec_path.empty()) {
      spec_path = opts.model_path;
      spec_path += ".json";
    }
    return load_external_backend(opts.model_path, IoSpec::load(spec_path), opts.series);
  }
  throw UnknownBackend("unknown backend '" + std::string(name) +
                       "' (expected one of: oracle, noisy, constant, external)");
}

}  // namespace localseg
