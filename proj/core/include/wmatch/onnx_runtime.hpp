#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace wmatch::onnx {

/// Dense float tensor in row-major (NCHW for images) order.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::size_t numel() const;
};

/// Minimal interpreter for feed-forward convolutional ONNX graphs with one
/// float input and one float output. Supported operators: Conv,
/// BatchNormalization, Relu, LeakyRelu, Clip, MaxPool, AveragePool,
/// GlobalAveragePool, Add, Sub, Mul, Div, Identity, Constant, Cast (to float). Anything else is
/// rejected at load time with Error(unsupported).
///
/// A loaded model is immutable; run() may be called concurrently.
class Model {
 public:
  static Model load(const std::filesystem::path& path);
  static Model parse(std::string_view bytes);

  Model(Model&&) noexcept;
  Model& operator=(Model&&) noexcept;
  ~Model();

  const std::string& input_name() const;
  const std::string& output_name() const;
  std::size_t node_count() const;

  Tensor run(const Tensor& input) const;

 private:
  struct Impl;
  explicit Model(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace wmatch::onnx
