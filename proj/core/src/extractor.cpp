#include "wmatch/extractor.hpp"

#include <algorithm>

#include "wmatch/errors.hpp"
#include "wmatch/preprocess.hpp"

namespace wmatch {

void ScaleSet::validate() const {
  require(!grid_sizes.empty(), ErrorCode::invalid_argument, "scale set is empty");
  for (std::size_t i = 0; i < grid_sizes.size(); ++i) {
    require(grid_sizes[i] >= 1, ErrorCode::invalid_argument, "scale grid sizes must be positive");
    if (i > 0) {
      require(grid_sizes[i] > grid_sizes[i - 1], ErrorCode::invalid_argument,
              "scale grid sizes must be strictly increasing");
    }
  }
  require(std::find(grid_sizes.begin(), grid_sizes.end(), query_grid) != grid_sizes.end(),
          ErrorCode::invalid_argument, "query grid " + std::to_string(query_grid) + " not in scale set");
}

std::size_t FeaturePyramid::cell_count() const {
  std::size_t n = 0;
  for (const auto& m : maps) n += m.cell_count();
  return n;
}

FeatureMap extract_at_grid(const Image& img, const Extractor& ex, std::uint32_t grid) {
  const std::uint32_t side = grid * ex.stride();
  const Image resized = resize_bilinear(img, side, side);
  const FeatureMap raw = ex.extract(resized);
  if (raw.height() != grid || raw.width() != grid) {
    fail(ErrorCode::shape_mismatch, "extractor produced " + std::to_string(raw.height()) + "x" +
                                        std::to_string(raw.width()) + " grid for " + std::to_string(side) +
                                        "px input, expected " + std::to_string(grid) + "x" + std::to_string(grid));
  }
  require(raw.dim() == ex.dim(), ErrorCode::shape_mismatch,
          "extractor produced dim " + std::to_string(raw.dim()) + ", declared " + std::to_string(ex.dim()));
  return normalize_features(raw);
}

FeaturePyramid extract_pyramid(const Image& img, const Extractor& ex, const ScaleSet& scales,
                               OrientationId orientation) {
  scales.validate();
  const Image oriented = orient_image(img, orientation);
  FeaturePyramid pyramid;
  pyramid.orientation = orientation;
  pyramid.image_ref = img.provenance;
  pyramid.maps.reserve(scales.grid_sizes.size());
  for (std::uint32_t s = 0; s < scales.grid_sizes.size(); ++s) {
    pyramid.maps.push_back(extract_at_grid(oriented, ex, scales.grid_sizes[s]).with_labels(s, orientation));
  }
  return pyramid;
}

FeatureMap extract_query_map(const Image& img, const Extractor& ex, const ScaleSet& scales) {
  scales.validate();
  const auto it = std::find(scales.grid_sizes.begin(), scales.grid_sizes.end(), scales.query_grid);
  const auto scale_id = static_cast<std::uint32_t>(it - scales.grid_sizes.begin());
  return extract_at_grid(img, ex, scales.query_grid).with_labels(scale_id, OrientationId{});
}

FeatureMap extract_baseline_map(const Image& img, const Extractor& ex, OrientationId orientation,
                                std::uint32_t resize_side, std::uint32_t crop_side) {
  require(crop_side % ex.stride() == 0, ErrorCode::invalid_argument,
          "baseline crop side must be a multiple of the extractor stride");
  const Image oriented = orient_image(resize_bilinear(img, resize_side, resize_side), orientation);
  const Image cropped = center_crop(oriented, crop_side);
  return extract_at_grid(cropped, ex, crop_side / ex.stride()).with_labels(0, orientation);
}

}  // namespace wmatch
