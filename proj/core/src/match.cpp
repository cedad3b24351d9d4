#include "wmatch/match.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "dense_search.hpp"
#include "wmatch/errors.hpp"

namespace wmatch {
namespace {

detail::SearchSpace make_space(const FeaturePyramid& pyramid) {
  require(!pyramid.maps.empty(), ErrorCode::invalid_argument, "best match against an empty pyramid");
  detail::SearchSpace space(pyramid.dim());
  for (const auto& map : pyramid.maps) space.add(map);
  return space;
}

PyramidMatch resolve(const detail::SearchSpace& space, std::span<const detail::SearchHit> hits,
                     GridPosition query_pos) {
  PyramidMatch best;
  double best_d2 = INFINITY;
  for (const auto& hit : hits) {
    const FeatureMap& map = space.map(hit.entry);
    const CellIndex cell{hit.cell / map.width(), hit.cell % map.width()};
    const GridPosition pos = map.center(cell.row, cell.col);
    const double d2 = squared_distance(query_pos, pos);
    // Hits arrive in (scale, row, col) order, so strict < keeps the first.
    if (d2 < best_d2) {
      best_d2 = d2;
      best = {map.scale_id(), cell, pos, map.height(), map.width(), hit.fs};
    }
  }
  return best;
}

constexpr std::size_t kQueryBlock = 64;

}  // namespace

PyramidMatch best_match(std::span<const float> feature, GridPosition query_pos, const FeaturePyramid& pyramid) {
  const auto space = make_space(pyramid);
  std::vector<float> scratch;
  const auto hits = space.argmax_set(feature, scratch);
  return resolve(space, hits, query_pos);
}

double normalized_sigma(double sigma_cells, std::uint32_t query_width) {
  require(sigma_cells > 0.0 && std::isfinite(sigma_cells), ErrorCode::invalid_argument, "sigma_cells must be positive");
  require(query_width > 0, ErrorCode::invalid_argument, "query grid width must be positive");
  return sigma_cells / query_width;
}

ScoreBreakdown score_pair(const FeatureMap& query, const FeaturePyramid& reference, double sigma_cells) {
  const double sigma = normalized_sigma(sigma_cells, query.width());
  require(reference.dim() == query.dim(), ErrorCode::shape_mismatch,
          "query dim " + std::to_string(query.dim()) + " vs reference dim " + std::to_string(reference.dim()));
  const auto space = make_space(reference);
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);

  ScoreBreakdown out;
  out.sigma_cells = sigma_cells;
  out.orientation = reference.orientation;
  out.query_height = query.height();
  out.query_width = query.width();
  out.records.resize(query.cell_count());

  const std::size_t n = query.cell_count();
  const std::size_t blocks = (n + kQueryBlock - 1) / kQueryBlock;
  tbb::parallel_for(std::size_t{0}, blocks, [&](std::size_t b) {
    const std::size_t first = b * kQueryBlock;
    const std::size_t count = std::min(kQueryBlock, n - first);
    std::vector<float> scratch;
    std::vector<std::vector<detail::SearchHit>> hits;
    space.argmax_sets(query.data().subspan(first * query.dim(), count * query.dim()), count, hits, scratch);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = first + k;
      const CellIndex qc{static_cast<std::uint32_t>(i / query.width()), static_cast<std::uint32_t>(i % query.width())};
      const GridPosition qpos = query.center(qc.row, qc.col);
      const PyramidMatch m = resolve(space, hits[k], qpos);
      MatchRecord& rec = out.records[i];
      rec.query_cell = qc;
      rec.query_pos = qpos;
      rec.matched_scale = m.scale_id;
      rec.matched_cell = m.cell;
      rec.matched_pos = m.position;
      rec.matched_height = m.grid_height;
      rec.matched_width = m.grid_width;
      rec.fs = m.fs;
      rec.sc = std::exp(-squared_distance(qpos, m.position) * inv_two_sigma2);
      rec.contribution = rec.fs * rec.sc;
    }
  });

  double total = 0.0;
  for (const auto& rec : out.records) total += rec.contribution;
  out.total = total;
  return out;
}

ScoreBreakdown score_oriented(const FeatureMap& query, std::span<const FeaturePyramid> pyramids, double sigma_cells) {
  require(pyramids.size() == OrientationId::kCount, ErrorCode::invalid_argument,
          "expected 8 oriented pyramids, got " + std::to_string(pyramids.size()));
  std::array<const FeaturePyramid*, OrientationId::kCount> by_id{};
  for (const auto& p : pyramids) {
    auto& slot = by_id[p.orientation.id()];
    require(slot == nullptr, ErrorCode::invalid_argument,
            "duplicate pyramid for orientation " + std::to_string(p.orientation.id()));
    slot = &p;
  }
  ScoreBreakdown best;
  bool have = false;
  for (const FeaturePyramid* p : by_id) {
    ScoreBreakdown s = score_pair(query, *p, sigma_cells);
    if (!have || s.total > best.total) {
      best = std::move(s);
      have = true;
    }
  }
  return best;
}

}  // namespace wmatch
