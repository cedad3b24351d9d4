#include "wmatch/onnx_extractor.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "wmatch/errors.hpp"

namespace wmatch {

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path default_sidecar_path(const std::filesystem::path& model_path) {
  // `model.onnx.json` wins over `model.json` when both exist.
  auto p = model_path;
  p += ".json";
  if (std::filesystem::exists(p)) return p;
  auto stem = model_path;
  stem.replace_extension(".json");
  return std::filesystem::exists(stem) ? stem : p;
}

BackboneSidecar BackboneSidecar::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open backbone sidecar " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, "sidecar " + path.string() + ": " + e.what());
  }
  BackboneSidecar s;
  try {
    s.stride = j.at("stride").get<std::uint32_t>();
    s.dim = j.at("dim").get<std::uint32_t>();
    s.layer = j.value("layer", "");
    const auto mean = j.at("input_mean").get<std::vector<float>>();
    const auto stdev = j.at("input_std").get<std::vector<float>>();
    require(mean.size() == 3 && stdev.size() == 3, ErrorCode::format, "sidecar normalization needs 3 channels");
    std::copy(mean.begin(), mean.end(), s.input_mean.begin());
    std::copy(stdev.begin(), stdev.end(), s.input_std.begin());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, "sidecar " + path.string() + ": " + e.what());
  }
  require(s.stride > 0 && s.dim > 0, ErrorCode::format, "sidecar stride and dim must be positive");
  for (float v : s.input_std) require(v > 0.0f, ErrorCode::format, "sidecar input_std must be positive");
  return s;
}

std::string BackboneSidecar::to_json() const {
  nlohmann::json j{{"stride", stride},
                   {"dim", dim},
                   {"layer", layer},
                   {"input_mean", std::vector<float>(input_mean.begin(), input_mean.end())},
                   {"input_std", std::vector<float>(input_std.begin(), input_std.end())}};
  return j.dump();
}

OnnxExtractor::OnnxExtractor(onnx::Model model, BackboneSidecar sidecar, std::string fingerprint)
    : model_(std::move(model)), sidecar_(std::move(sidecar)), fingerprint_(std::move(fingerprint)) {}

OnnxExtractor OnnxExtractor::load(const std::filesystem::path& model_path) {
  return load(model_path, default_sidecar_path(model_path));
}

OnnxExtractor OnnxExtractor::load(const std::filesystem::path& model_path, const std::filesystem::path& sidecar_path) {
  std::ifstream in(model_path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open model " + model_path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  auto sidecar = BackboneSidecar::load(sidecar_path);
  auto model = onnx::Model::parse(bytes);
  std::string fp = "onnx:" + fnv1a_hex(bytes) + ":" + fnv1a_hex(sidecar.to_json());
  return OnnxExtractor(std::move(model), std::move(sidecar), std::move(fp));
}

FeatureMap OnnxExtractor::extract(const Image& img) const {
  require(img.square(), ErrorCode::invalid_argument, "extractor input must be square");
  require(img.channels == 1 || img.channels == 3, ErrorCode::unsupported, "extractor input needs 1 or 3 channels");
  const std::size_t plane = img.pixel_count();
  onnx::Tensor input;
  input.shape = {1, 3, img.height, img.width};
  input.data.resize(3 * plane);
  for (std::uint32_t c = 0; c < 3; ++c) {
    const std::uint32_t src_c = img.channels == 1 ? 0 : c;
    for (std::size_t i = 0; i < plane; ++i) {
      input.data[c * plane + i] = (img.pixels[i * img.channels + src_c] - sidecar_.input_mean[c]) / sidecar_.input_std[c];
    }
  }
  const onnx::Tensor out = model_.run(input);
  require(out.shape.size() == 4 && out.shape[0] == 1, ErrorCode::shape_mismatch, "backbone output must be 1 x dim x g x g");
  const auto dim = static_cast<std::uint32_t>(out.shape[1]);
  const auto h = static_cast<std::uint32_t>(out.shape[2]);
  const auto w = static_cast<std::uint32_t>(out.shape[3]);
  require(dim == sidecar_.dim, ErrorCode::shape_mismatch,
          "backbone produced " + std::to_string(dim) + " channels, sidecar declares " + std::to_string(sidecar_.dim));
  std::vector<float> data(static_cast<std::size_t>(h) * w * dim);
  const std::size_t out_plane = static_cast<std::size_t>(h) * w;
  for (std::uint32_t k = 0; k < dim; ++k) {
    for (std::size_t i = 0; i < out_plane; ++i) data[i * dim + k] = out.data[k * out_plane + i];
  }
  return FeatureMap(h, w, dim, std::move(data));
}

}  // namespace wmatch
