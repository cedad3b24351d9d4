#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "wmatch/extractor.hpp"
#include "wmatch/onnx_runtime.hpp"

namespace wmatch {

/// Metadata written next to an exported backbone (`<model>.json`):
///
///   {"stride": 16, "dim": 256, "layer": "conv4",
///    "input_mean": [0.485, 0.456, 0.406], "input_std": [0.229, 0.224, 0.225]}
///
/// stride, dim, input_mean and input_std are required.
struct BackboneSidecar {
  std::uint32_t stride = 16;
  std::uint32_t dim = 0;
  std::string layer;
  std::array<float, 3> input_mean{0.0f, 0.0f, 0.0f};
  std::array<float, 3> input_std{1.0f, 1.0f, 1.0f};

  static BackboneSidecar load(const std::filesystem::path& path);
  std::string to_json() const;
};

/// `<model>.json` next to the model: the full file name plus ".json", or the
/// name with its extension replaced when only that file exists.
std::filesystem::path default_sidecar_path(const std::filesystem::path& model_path);

/// Frozen convolutional backbone read from an ONNX file with a single
/// N x 3 x H x W input and a single N x dim x g x g output.
class OnnxExtractor final : public Extractor {
 public:
  static OnnxExtractor load(const std::filesystem::path& model_path);
  static OnnxExtractor load(const std::filesystem::path& model_path, const std::filesystem::path& sidecar_path);

  std::uint32_t stride() const override { return sidecar_.stride; }
  std::uint32_t dim() const override { return sidecar_.dim; }
  ExtractorKind kind() const override { return ExtractorKind::neural; }
  std::string fingerprint() const override { return fingerprint_; }
  FeatureMap extract(const Image& img) const override;

  const BackboneSidecar& sidecar() const { return sidecar_; }

 private:
  OnnxExtractor(onnx::Model model, BackboneSidecar sidecar, std::string fingerprint);

  onnx::Model model_;
  BackboneSidecar sidecar_;
  std::string fingerprint_;
};

/// 64-bit FNV-1a, hex encoded. Used for file fingerprints.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace wmatch
