#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wmatch/image.hpp"
#include "wmatch/match.hpp"

namespace wmatch {

enum class HeatmapTarget { query, reference };

/// Per-cell contribution values, row-major, in double.
struct ContributionGrid {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<double> values;
  double total = 0.0;  // breakdown total the colors are relative to
};

/// Query mode: the contribution of each query cell at its own position.
/// Reference mode: contributions splatted at their matched positions onto the
/// grid of the largest matched scale, summed on collision. Both modes conserve
/// the sum of contributions.
ContributionGrid contribution_grid(const ScoreBreakdown& breakdown, HeatmapTarget target);

/// Fixed color map: values <= 0 are blue, values >= 1% of the total are red,
/// linear in between. Each cell becomes a cell_px square.
Image render_heatmap(const ContributionGrid& grid, std::uint32_t cell_px = 16);

/// Audit record: target, totals and one entry per query cell.
nlohmann::json breakdown_to_json(const ScoreBreakdown& breakdown);

/// Writes `png_path` and `png_path` + ".json" (grid values plus records).
void export_heatmap(const std::filesystem::path& png_path, const ScoreBreakdown& breakdown, HeatmapTarget target,
                    std::uint32_t cell_px = 16);

const char* to_string(HeatmapTarget target);

}  // namespace wmatch
