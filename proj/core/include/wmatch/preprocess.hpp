#pragma once

#include <cstdint>
#include <optional>

#include "wmatch/feature_map.hpp"
#include "wmatch/image.hpp"

namespace wmatch {

struct PreprocessConfig {
  /// Side the guide rectangle is stretched to.
  std::uint32_t guide_side = 224;
  /// Side of the square cropped around the rectangle center.
  std::uint32_t crop_side = 256;
};

/// Anisotropically rescales `raw` so that `guide` becomes guide_side x
/// guide_side, then crops a crop_side square centered on the rectangle.
/// Pixels of the crop that fall outside the rescaled image take the per-channel
/// mean of `raw`. Without a guide the whole image is the guide.
Image preprocess(const Image& raw, std::optional<Rect> guide = std::nullopt, const PreprocessConfig& cfg = {});

/// Exact pixel permutation: horizontal flip (if any) then counter-clockwise
/// rotation in quarter turns. Requires a square image.
Image orient_image(const Image& img, OrientationId orientation);

}  // namespace wmatch
