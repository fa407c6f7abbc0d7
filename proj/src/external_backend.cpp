#include "localseg/external_backend.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

#include "json.hpp"

#ifdef LOCALSEG_HAVE_OPENCV_DNN
#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>
#endif

namespace localseg {
namespace {

using nlohmann::json;

NetworkSpec parse_network(const json& j, const std::filesystem::path& base_dir) {
  NetworkSpec n;
  if (j.contains("model")) {
    std::filesystem::path p = j.at("model").get<std::string>();
    n.model = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }
  n.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  n.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  n.layout = j.value("layout", "NCHW");
  if (n.layout != "NCHW") throw BackendError("io_spec: only NCHW layout is supported, got " + n.layout);
  if (j.contains("mean")) n.mean = j.at("mean").get<std::array<float, 3>>();
  if (j.contains("std")) n.std = j.at("std").get<std::array<float, 3>>();
  return n;
}

void require_roles(const std::map<std::string, std::string>& m,
                   std::initializer_list<const char*> roles, const char* where) {
  for (const char* r : roles) {
    if (!m.contains(r)) throw BackendError(std::string("io_spec: ") + where + " is missing role '" + r + "'");
  }
}

}  // namespace

IoSpec IoSpec::parse(std::string_view json_text, const std::filesystem::path& base_dir) {
  IoSpec spec;
  try {
    const json doc = json::parse(json_text);
    spec.segmentor = parse_network(doc.at("segmentor"), base_dir);
    if (doc.contains("refiner")) spec.refiner = parse_network(doc.at("refiner"), base_dir);
  } catch (const json::exception& e) {
    throw BackendError(std::string("io_spec: ") + e.what());
  }
  require_roles(spec.segmentor.inputs, {"image", "prev_mask", "pos_clicks", "neg_clicks"},
                "segmentor.inputs");
  require_roles(spec.segmentor.outputs, {"logits"}, "segmentor.outputs");
  if (spec.refiner) {
    if (spec.refiner->model.empty()) throw BackendError("io_spec: refiner.model is required");
    require_roles(spec.refiner->inputs, {"image", "pos_clicks", "neg_clicks", "roi_logits"},
                  "refiner.inputs");
    require_roles(spec.refiner->outputs, {"detail", "boundary"}, "refiner.outputs");
  }
  return spec;
}

IoSpec IoSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BackendError("io_spec: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.parent_path());
}

#ifdef LOCALSEG_HAVE_OPENCV_DNN

namespace {

std::string shape_str(const cv::Mat& m) {
  std::string s = "[";
  for (int i = 0; i < m.dims; ++i) {
    if (i) s += ",";
    s += std::to_string(m.size[i]);
  }
  return s + "]";
}

std::string shape_str(std::initializer_list<int> dims) {
  std::string s = "[";
  bool first = true;
  for (int d : dims) {
    if (!first) s += ",";
    first = false;
    s += std::to_string(d);
  }
  return s + "]";
}

cv::Mat blob_from(const ScalarStack& planes) {
  const int c = static_cast<int>(planes.size());
  const int h = planes.front().height();
  const int w = planes.front().width();
  const int dims[] = {1, c, h, w};
  cv::Mat blob(4, dims, CV_32F);
  auto* dst = blob.ptr<float>();
  for (const auto& p : planes) {
    auto v = p.values();
    std::copy(v.begin(), v.end(), dst);
    dst += v.size();
  }
  return blob;
}

cv::Mat blob_from(const ScalarMap& m) { return blob_from(ScalarStack{m}); }

cv::Mat image_blob(const RgbPlanes& image, const NetworkSpec& spec) {
  ScalarStack planes;
  for (int c = 0; c < 3; ++c) {
    ScalarMap p = image[c];
    for (auto& v : p.values()) v = (v - spec.mean[c]) / spec.std[c];
    planes.push_back(std::move(p));
  }
  return blob_from(planes);
}

ScalarStack stack_from(const cv::Mat& blob, const std::string& what, Size expect, bool check_hw) {
  if (blob.dims != 4 || blob.size[0] != 1) {
    throw BackendError(what + ": expected rank-4 [1,C,H,W], got " + shape_str(blob));
  }
  const int c = blob.size[1];
  const int h = blob.size[2];
  const int w = blob.size[3];
  if (check_hw && (h != expect.height || w != expect.width)) {
    throw BackendError(what + ": expected " + shape_str({1, c, expect.height, expect.width}) +
                       ", got " + shape_str(blob));
  }
  ScalarStack out;
  const float* src = blob.ptr<float>();
  for (int i = 0; i < c; ++i) {
    ScalarMap m(w, h);
    std::copy(src, src + static_cast<std::ptrdiff_t>(w) * h, m.values().begin());
    src += static_cast<std::ptrdiff_t>(w) * h;
    out.push_back(std::move(m));
  }
  return out;
}

ScalarMap single_channel(const cv::Mat& blob, const std::string& what, Size expect) {
  if (blob.dims != 4 || blob.size[0] != 1 || blob.size[1] != 1 || blob.size[2] != expect.height ||
      blob.size[3] != expect.width) {
    throw BackendError(what + ": expected " + shape_str({1, 1, expect.height, expect.width}) +
                       ", got " + shape_str(blob));
  }
  return std::move(stack_from(blob, what, expect, true).front());
}

// cv::dnn::Net is not reentrant; every forward pass holds the lock.
class OnnxNetwork {
 public:
  OnnxNetwork(const std::filesystem::path& path, const NetworkSpec& spec) : spec_(spec) {
    if (!std::filesystem::exists(path)) throw BackendError("model file not found: " + path.string());
    try {
      net_ = cv::dnn::readNetFromONNX(path.string());
    } catch (const cv::Exception& e) {
      throw BackendError("cannot load model " + path.string() + ": " + e.what());
    }
    for (const auto& [role, name] : spec_.outputs) {
      if (net_.getLayerId(name) < 0) {
        throw BackendError("model " + path.string() + " has no output tensor '" + name +
                           "' (role " + role + ")");
      }
    }
  }

  std::map<std::string, cv::Mat> run(const std::map<std::string, cv::Mat>& inputs) const {
    std::vector<std::string> names;
    std::vector<std::string> roles;
    for (const auto& [role, name] : spec_.outputs) {
      roles.push_back(role);
      names.push_back(name);
    }
    std::vector<cv::Mat> outs;
    {
      std::lock_guard lock(mu_);
      try {
        for (const auto& [role, blob] : inputs) {
          net_.setInput(blob, spec_.inputs.at(role));
        }
        net_.forward(outs, names);
      } catch (const cv::Exception& e) {
        throw BackendError(std::string("inference failed (check tensor names in io_spec): ") + e.what());
      } catch (const std::exception& e) {
        throw BackendError(std::string("inference failed: ") + e.what());
      }
    }
    std::map<std::string, cv::Mat> result;
    for (std::size_t i = 0; i < outs.size(); ++i) result[roles[i]] = outs[i].clone();
    return result;
  }

  [[nodiscard]] const NetworkSpec& spec() const { return spec_; }

 private:
  NetworkSpec spec_;
  mutable cv::dnn::Net net_;
  mutable std::mutex mu_;
};

class ExternalBackend final : public Backend {
 public:
  ExternalBackend(const std::filesystem::path& model, const IoSpec& spec)
      : segmentor_(model, spec.segmentor) {
    if (spec.refiner) refiner_.emplace(spec.refiner->model, *spec.refiner);
  }

  [[nodiscard]] std::string name() const override { return "external"; }

  [[nodiscard]] CoarseOutput segment(const SegmentorInput& in) const override {
    validate_input(in);
    const auto& spec = segmentor_.spec();
    auto outs = segmentor_.run({{"image", image_blob(in.image, spec)},
                                {"prev_mask", blob_from(in.prev_mask)},
                                {"pos_clicks", blob_from(in.pos_clicks)},
                                {"neg_clicks", blob_from(in.neg_clicks)}});
    CoarseOutput out;
    out.logits = single_channel(outs.at("logits"), "segmentor output 'logits'", in.crop.out);
    if (outs.contains("feature")) {
      out.feature = stack_from(outs.at("feature"), "segmentor output 'feature'", {}, false);
    } else {
      out.feature = oracle_feature(out.logits, in.image, in.pos_clicks, in.neg_clicks);
    }
    validate_output(out, in.crop.out);
    return out;
  }

  [[nodiscard]] RefineOutput refine(const RefinerInput& in) const override {
    validate_input(in);
    if (!refiner_) return {in.roi_logits, ScalarMap(in.crop.out, -kOracleLogit)};
    const auto& spec = refiner_->spec();
    std::map<std::string, cv::Mat> inputs{{"image", image_blob(in.image, spec)},
                                          {"pos_clicks", blob_from(in.pos_clicks)},
                                          {"neg_clicks", blob_from(in.neg_clicks)},
                                          {"roi_logits", blob_from(in.roi_logits)}};
    if (spec.inputs.contains("roi_feature") && !in.roi_feature.empty()) {
      inputs.emplace("roi_feature", blob_from(in.roi_feature));
    }
    auto outs = refiner_->run(inputs);
    RefineOutput out{single_channel(outs.at("detail"), "refiner output 'detail'", in.crop.out),
                     single_channel(outs.at("boundary"), "refiner output 'boundary'", in.crop.out)};
    validate_output(out, in.crop.out);
    return out;
  }

 private:
  OnnxNetwork segmentor_;
  std::optional<OnnxNetwork> refiner_;
};

void dry_run(const Backend& backend, const ModelSeries& series) {
  SegmentorInput seg;
  seg.crop = {BBox::of(series.segmentor_input), series.segmentor_input, 1.0};
  for (auto& p : seg.image) p = ScalarMap(series.segmentor_input, 0.0f);
  seg.prev_mask = seg.pos_clicks = seg.neg_clicks = ScalarMap(series.segmentor_input, 0.0f);
  const CoarseOutput coarse = backend.segment(seg);

  RefinerInput ref;
  ref.crop = {BBox::of(series.refiner_input), series.refiner_input, 1.0};
  for (auto& p : ref.image) p = ScalarMap(series.refiner_input, 0.0f);
  ref.pos_clicks = ref.neg_clicks = ref.roi_logits = ScalarMap(series.refiner_input, 0.0f);
  if (!coarse.feature.empty()) {
    const Size fs = coarse.feature.front().size();
    ref.roi_feature = roi_align(coarse.feature, RectF::of(BBox::of(fs)), fs);
  }
  (void)backend.refine(ref);
}

}  // namespace

bool external_backend_available() { return true; }

std::shared_ptr<const Backend> load_external_backend(const std::filesystem::path& model_path,
                                                     const IoSpec& spec, const ModelSeries& series) {
  auto backend = std::make_shared<ExternalBackend>(model_path, spec);
  dry_run(*backend, series);
  return backend;
}

#else

bool external_backend_available() { return false; }

std::shared_ptr<const Backend> load_external_backend(const std::filesystem::path& model_path,
                                                     const IoSpec&, const ModelSeries&) {
  throw BackendError("cannot load " + model_path.string() +
                     ": this build has no ONNX inference runtime (OpenCV dnn not found)");
}

#endif

}  // namespace localseg
