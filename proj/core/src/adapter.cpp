#include "wmatch/adapter.hpp"

#include <cmath>
#include <fstream>
#include <string_view>

#include "wmatch/binary_io.hpp"
#include "wmatch/errors.hpp"
#include "wmatch/onnx_extractor.hpp"

namespace wmatch {
namespace {

bool all_finite(const std::vector<float>& v) {
  for (float x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool is_normalized(const FeatureMap& map) {
  for (std::size_t i = 0; i < map.cell_count(); ++i) {
    if (map.is_zero_cell(i)) continue;
    const auto c = map.cell(i);
    if (std::abs(dot(c, c) - 1.0) > 1e-5) return false;
  }
  return true;
}

}  // namespace

AdapterParams AdapterParams::identity(std::uint32_t dim) {
  require(dim > 0, ErrorCode::invalid_argument, "adapter dim must be positive");
  AdapterParams p;
  p.dim = dim;
  p.weight.assign(static_cast<std::size_t>(dim) * dim, 0.0f);
  for (std::uint32_t i = 0; i < dim; ++i) p.weight[static_cast<std::size_t>(i) * dim + i] = 1.0f;
  p.bias.assign(dim, 0.0f);
  p.adam.m_weight.assign(p.weight.size(), 0.0f);
  p.adam.v_weight.assign(p.weight.size(), 0.0f);
  p.adam.m_bias.assign(dim, 0.0f);
  p.adam.v_bias.assign(dim, 0.0f);
  return p;
}

bool AdapterParams::is_identity() const {
  for (std::uint32_t r = 0; r < dim; ++r) {
    for (std::uint32_t c = 0; c < dim; ++c) {
      if (weight[static_cast<std::size_t>(r) * dim + c] != (r == c ? 1.0f : 0.0f)) return false;
    }
    if (bias[r] != 0.0f) return false;
  }
  return true;
}

void AdapterParams::validate() const {
  const std::size_t n = static_cast<std::size_t>(dim) * dim;
  require(dim > 0 && weight.size() == n && bias.size() == dim, ErrorCode::shape_mismatch,
          "adapter parameter shapes do not match dim " + std::to_string(dim));
  require(adam.m_weight.size() == n && adam.v_weight.size() == n && adam.m_bias.size() == dim &&
              adam.v_bias.size() == dim,
          ErrorCode::shape_mismatch, "adapter optimizer state does not match parameter shapes");
  require(all_finite(weight) && all_finite(bias), ErrorCode::non_finite, "adapter parameters are not finite");
  require(all_finite(adam.m_weight) && all_finite(adam.m_bias) && all_finite(adam.v_weight) &&
              all_finite(adam.v_bias),
          ErrorCode::non_finite, "adapter optimizer state is not finite");
}

std::string AdapterParams::id() const {
  if (is_identity()) return "none";
  std::string bytes(reinterpret_cast<const char*>(weight.data()), weight.size() * sizeof(float));
  bytes.append(reinterpret_cast<const char*>(bias.data()), bias.size() * sizeof(float));
  return "adapter:" + fnv1a_hex(bytes);
}

FeatureMap apply_adapter(const FeatureMap& map, const AdapterParams& params) {
  require(map.dim() == params.dim, ErrorCode::shape_mismatch,
          "adapter dim " + std::to_string(params.dim) + " does not match feature dim " + std::to_string(map.dim()));
  params.validate();
  if (params.is_identity() && is_normalized(map)) return map;

  const std::uint32_t d = params.dim;
  std::vector<float> out(map.data().size(), 0.0f);
  std::vector<double> y(d);
  for (std::size_t i = 0; i < map.cell_count(); ++i) {
    if (map.is_zero_cell(i)) continue;
    const auto f = map.cell(i);
    double sq = 0.0;
    for (std::uint32_t r = 0; r < d; ++r) {
      double acc = params.bias[r];
      const float* w = params.weight.data() + static_cast<std::size_t>(r) * d;
      for (std::uint32_t c = 0; c < d; ++c) acc += static_cast<double>(w[c]) * f[c];
      y[r] = acc;
      sq += acc * acc;
    }
    if (sq == 0.0) continue;
    const double inv = 1.0 / std::sqrt(sq);
    for (std::uint32_t r = 0; r < d; ++r) out[i * d + r] = static_cast<float>(y[r] * inv);
  }
  return FeatureMap(map.height(), map.width(), d, std::move(out), map.scale_id(), map.orientation());
}

void write_adapter(std::ostream& out, const AdapterParams& p) {
  p.validate();
  io::write_magic(out, "ADPT");
  io::write_u32(out, kAdptVersion);
  io::write_u32(out, p.dim);
  io::write_f32_array(out, p.weight);
  io::write_f32_array(out, p.bias);
  io::write_u64(out, p.adam.step);
  io::write_f32_array(out, p.adam.m_weight);
  io::write_f32_array(out, p.adam.m_bias);
  io::write_f32_array(out, p.adam.v_weight);
  io::write_f32_array(out, p.adam.v_bias);
}

AdapterParams read_adapter(std::istream& in) {
  io::expect_magic(in, "ADPT", "adapter");
  const auto version = io::read_u32(in);
  require(version == kAdptVersion, ErrorCode::format, "unsupported ADPT version " + std::to_string(version));
  const auto dim = io::read_u32(in);
  require(dim > 0 && dim <= 65536, ErrorCode::format, "ADPT dim out of range");
  AdapterParams p = AdapterParams::identity(dim);
  io::read_f32_array(in, p.weight);
  io::read_f32_array(in, p.bias);
  p.adam.step = io::read_u64(in);
  io::read_f32_array(in, p.adam.m_weight);
  io::read_f32_array(in, p.adam.m_bias);
  io::read_f32_array(in, p.adam.v_weight);
  io::read_f32_array(in, p.adam.v_bias);
  p.validate();
  return p;
}

void save_adapter(const std::filesystem::path& path, const AdapterParams& params) {
  io::write_file_atomically(path, [&](std::ostream& out) { write_adapter(out, params); });
}

AdapterParams load_adapter(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path.string());
  return read_adapter(in);
}

}  // namespace wmatch
