#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wmatch/feature_map.hpp"

namespace wmatch {

/// First/second moment estimates for every adapter parameter.
struct AdamState {
  std::vector<float> m_weight, m_bias;
  std::vector<float> v_weight, v_bias;
  std::uint64_t step = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Affine map f -> W f + b over local features, followed by renormalization.
/// Stands in for fine-tuning the frozen backbone.
struct AdapterParams {
  std::uint32_t dim = 0;
  std::vector<float> weight;  // dim x dim, row-major
  std::vector<float> bias;
  AdamState adam;

  /// W = I, b = 0, zero moments.
  static AdapterParams identity(std::uint32_t dim);

  bool is_identity() const;
  /// Throws unless all shapes agree and every value is finite.
  void validate() const;
  /// "none" for the identity transform, otherwise a hash of W and b.
  std::string id() const;

  friend bool operator==(const AdapterParams&, const AdapterParams&) = default;
};

/// Per cell: normalize(W f + b), accumulated in double. Zero cells stay zero.
/// The identity transform returns already-normalized maps unchanged.
/// Throws Error(shape_mismatch) on a dim mismatch and Error(non_finite) for
/// non-finite parameters.
FeatureMap apply_adapter(const FeatureMap& map, const AdapterParams& params);

/// ADPT layout (little-endian): "ADPT", u32 version, u32 D, D*D float32 W,
/// D float32 b, u64 Adam step, then float32 m_W, m_b, v_W, v_b.
inline constexpr std::uint32_t kAdptVersion = 1;

void write_adapter(std::ostream& out, const AdapterParams& params);
AdapterParams read_adapter(std::istream& in);
void save_adapter(const std::filesystem::path& path, const AdapterParams& params);
AdapterParams load_adapter(const std::filesystem::path& path);

}  // namespace wmatch
