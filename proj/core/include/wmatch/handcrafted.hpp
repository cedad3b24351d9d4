#pragma once

#include <cstdint>

#include "wmatch/extractor.hpp"

namespace wmatch {

inline constexpr std::uint32_t kHandcraftedDim = 9;

/// Deterministic gradient-histogram features. The image (converted to gray) is
/// split into grid x grid cells; each cell holds an 8-bin histogram of signed
/// gradient orientation weighted by magnitude (averaged over the cell's
/// pixels), followed by the cell's mean intensity minus the image mean. The
/// output is raw; callers normalize.
///
/// Bins are 45-degree sectors assigned by exact sign/magnitude comparisons, so
/// a quarter-turn of the image shifts every histogram by exactly two bins.
/// Throws Error(invalid_argument) when the image is not square or the grid is
/// larger than the image side.
FeatureMap handcrafted_test_extract(const Image& img, std::uint32_t grid);

/// Orientation bin (0..7) of a gradient vector; -1 for the zero vector.
int gradient_bin(float gx, float gy);

class HandcraftedExtractor final : public Extractor {
 public:
  explicit HandcraftedExtractor(std::uint32_t stride = 16);

  std::uint32_t stride() const override { return stride_; }
  std::uint32_t dim() const override { return kHandcraftedDim; }
  ExtractorKind kind() const override { return ExtractorKind::handcrafted_test; }
  std::string fingerprint() const override;
  FeatureMap extract(const Image& img) const override;

 private:
  std::uint32_t stride_;
};

}  // namespace wmatch
