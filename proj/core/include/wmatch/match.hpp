#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wmatch/extractor.hpp"
#include "wmatch/feature_map.hpp"

namespace wmatch {

/// Spatial tolerance defaults, in query-grid cells.
inline constexpr double kDefaultSigmaCells = 2.0;
/// Sketch-retrieval preset: 24 x 24 query grid, tolerance of four cells.
inline constexpr double kSbirSigmaCells = 4.0;
inline constexpr std::uint32_t kSbirQueryGrid = 24;

struct PyramidMatch {
  std::uint32_t scale_id = 0;
  CellIndex cell;
  GridPosition position;
  std::uint32_t grid_height = 0;
  std::uint32_t grid_width = 0;
  double fs = 0.0;
};

/// Most similar cell (cosine) over every cell of every scale of `pyramid`.
/// Exact ties go to the cell closest to `query_pos`, then to the smallest
/// (scale_id, row, col). Throws Error(invalid_argument) for an empty pyramid
/// and Error(shape_mismatch) for a dim mismatch.
PyramidMatch best_match(std::span<const float> feature, GridPosition query_pos, const FeaturePyramid& pyramid);

struct MatchRecord {
  CellIndex query_cell;
  GridPosition query_pos;
  std::uint32_t matched_scale = 0;
  CellIndex matched_cell;
  GridPosition matched_pos;
  std::uint32_t matched_height = 0;  // grid of the matched scale
  std::uint32_t matched_width = 0;
  double fs = 0.0;
  double sc = 0.0;
  double contribution = 0.0;  // fs * sc
};

struct ScoreBreakdown {
  std::vector<MatchRecord> records;  // one per query cell, row-major
  double total = 0.0;
  double sigma_cells = 0.0;
  OrientationId orientation{};
  std::uint32_t query_height = 0;
  std::uint32_t query_width = 0;
};

/// Normalized Gaussian width: sigma_cells / query_width.
double normalized_sigma(double sigma_cells, std::uint32_t query_width);

/// Spatially consistent matching score. Each query cell contributes only its
/// best match in the pyramid, weighted by exp(-|x_q - x_r|^2 / (2 sigma^2))
/// with positions normalized per grid. Query cells are processed in parallel;
/// the total is summed in row-major order.
ScoreBreakdown score_pair(const FeatureMap& query, const FeaturePyramid& reference, double sigma_cells);

/// Best score over the eight reference orientations (one pyramid per
/// orientation id, any order). Ties go to the smallest orientation id.
ScoreBreakdown score_oriented(const FeatureMap& query, std::span<const FeaturePyramid> pyramids, double sigma_cells);

}  // namespace wmatch
