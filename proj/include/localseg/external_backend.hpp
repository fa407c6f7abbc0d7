#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "localseg/backend.hpp"

namespace localseg {

// io_spec document:
//
//   {
//     "segmentor": {
//       "inputs":  {"image": "img", "prev_mask": "prev", "pos_clicks": "pos", "neg_clicks": "neg"},
//       "outputs": {"logits": "logits", "feature": "feat"},        // feature optional
//       "layout": "NCHW",
//       "mean": [0.485, 0.456, 0.406], "std": [0.229, 0.224, 0.225]
//     },
//     "refiner": {                                                  // optional
//       "model": "refiner.onnx",                                    // relative to the spec file
//       "inputs":  {"image": "img", "pos_clicks": "pos", "neg_clicks": "neg",
//                   "roi_logits": "coarse", "roi_feature": "feat"}, // roi_feature optional
//       "outputs": {"detail": "detail", "boundary": "boundary"}
//     }
//   }
//
// Without a refiner section the refine step returns a closed gate, so the
// fused prediction equals the coarse logits.

struct NetworkSpec {
  std::filesystem::path model;                 // empty for the segmentor: comes from --model
  std::map<std::string, std::string> inputs;   // role -> tensor name
  std::map<std::string, std::string> outputs;  // role -> tensor name
  std::string layout = "NCHW";
  std::array<float, 3> mean{0.0f, 0.0f, 0.0f};
  std::array<float, 3> std{1.0f, 1.0f, 1.0f};
};

struct IoSpec {
  NetworkSpec segmentor;
  std::optional<NetworkSpec> refiner;

  /// Parses a JSON document; relative refiner paths resolve against base_dir.
  static IoSpec parse(std::string_view json_text, const std::filesystem::path& base_dir = {});
  static IoSpec load(const std::filesystem::path& path);
};

/// True when the build links an inference runtime able to read ONNX files.
[[nodiscard]] bool external_backend_available();

/// Loads the exported network(s) and dry-runs them once on zero tensors.
/// Throws BackendError on a missing file, unknown tensor names, or outputs
/// whose shape differs from the contract.
[[nodiscard]] std::shared_ptr<const Backend> load_external_backend(
    const std::filesystem::path& model_path, const IoSpec& spec, const ModelSeries& series);

}  // namespace localseg
