#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wmatch/feature_map.hpp"
#include "wmatch/image.hpp"

namespace wmatch {

enum class ExtractorKind { neural, handcrafted_test };

/// Image -> feature grid function. An input of side s * stride must produce
/// an s x s grid. Implementations are immutable after construction and safe to
/// call from several threads.
class Extractor {
 public:
  virtual ~Extractor() = default;

  virtual std::uint32_t stride() const = 0;
  virtual std::uint32_t dim() const = 0;
  virtual ExtractorKind kind() const = 0;
  /// Stable identity of the extractor and its weights; stored in indexes and
  /// checked at query time.
  virtual std::string fingerprint() const = 0;
  /// Raw (not normalized) features for a square image.
  virtual FeatureMap extract(const Image& img) const = 0;
};

/// Feature-grid sides of the matching pyramid. The query side is extracted at
/// `query_grid` only.
struct ScaleSet {
  std::vector<std::uint32_t> grid_sizes{16, 19, 22, 25, 28};
  std::uint32_t query_grid = 22;

  /// Throws Error(invalid_argument) unless strictly increasing and containing
  /// query_grid.
  void validate() const;
  friend bool operator==(const ScaleSet&, const ScaleSet&) = default;
};

/// One normalized feature map per grid size, all for the same orientation.
struct FeaturePyramid {
  std::vector<FeatureMap> maps;
  OrientationId orientation{};
  std::string image_ref;

  std::uint32_t dim() const { return maps.empty() ? 0 : maps.front().dim(); }
  std::size_t cell_count() const;
  friend bool operator==(const FeaturePyramid& a, const FeaturePyramid& b) {
    return a.maps == b.maps && a.orientation == b.orientation;
  }
};

/// Resizes `img` to grid * stride, extracts, checks the grid shape and
/// L2-normalizes each cell.
FeatureMap extract_at_grid(const Image& img, const Extractor& ex, std::uint32_t grid);

/// Orients `img`, then extracts one normalized map per scale.
FeaturePyramid extract_pyramid(const Image& img, const Extractor& ex, const ScaleSet& scales,
                               OrientationId orientation);

/// Query-side map at scales.query_grid, canonical orientation.
FeatureMap extract_query_map(const Image& img, const Extractor& ex, const ScaleSet& scales);

/// Map used by the global baseline similarities: the canonical image is
/// brought to `resize_side`, center-cropped to `crop_side` and extracted at
/// its native grid (224 / 16 = 14 by default).
FeatureMap extract_baseline_map(const Image& img, const Extractor& ex, OrientationId orientation,
                                std::uint32_t resize_side = 256, std::uint32_t crop_side = 224);

}  // namespace wmatch
