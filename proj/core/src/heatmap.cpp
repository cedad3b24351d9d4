#include "wmatch/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "wmatch/binary_io.hpp"
#include "wmatch/errors.hpp"
#include "wmatch/image_io.hpp"

namespace wmatch {
namespace {

std::uint32_t to_cell(double normalized, std::uint32_t side) {
  const auto c = static_cast<std::int64_t>(std::floor(normalized * side));
  return static_cast<std::uint32_t>(std::clamp<std::int64_t>(c, 0, side - 1));
}

}  // namespace

const char* to_string(HeatmapTarget target) { return target == HeatmapTarget::query ? "query" : "reference"; }

ContributionGrid contribution_grid(const ScoreBreakdown& breakdown, HeatmapTarget target) {
  ContributionGrid grid;
  grid.total = breakdown.total;
  if (target == HeatmapTarget::query) {
    grid.height = breakdown.query_height;
    grid.width = breakdown.query_width;
    require(breakdown.records.size() == static_cast<std::size_t>(grid.height) * grid.width, ErrorCode::shape_mismatch,
            "breakdown record count does not match its query grid");
    grid.values.assign(breakdown.records.size(), 0.0);
    for (const auto& r : breakdown.records) {
      grid.values[static_cast<std::size_t>(r.query_cell.row) * grid.width + r.query_cell.col] += r.contribution;
    }
    return grid;
  }
  for (const auto& r : breakdown.records) {
    grid.height = std::max(grid.height, r.matched_height);
    grid.width = std::max(grid.width, r.matched_width);
  }
  grid.values.assign(static_cast<std::size_t>(grid.height) * grid.width, 0.0);
  for (const auto& r : breakdown.records) {
    const std::uint32_t row = to_cell(r.matched_pos.v, grid.height);
    const std::uint32_t col = to_cell(r.matched_pos.u, grid.width);
    grid.values[static_cast<std::size_t>(row) * grid.width + col] += r.contribution;
  }
  return grid;
}

Image render_heatmap(const ContributionGrid& grid, std::uint32_t cell_px) {
  require(cell_px > 0, ErrorCode::invalid_argument, "heatmap cell size must be positive");
  Image img(grid.width * cell_px, grid.height * cell_px, 3);
  const double hot = 0.01 * grid.total;
  for (std::uint32_t r = 0; r < grid.height; ++r) {
    for (std::uint32_t c = 0; c < grid.width; ++c) {
      const double v = grid.values[static_cast<std::size_t>(r) * grid.width + c];
      double t = 0.0;
      if (v > 0.0) t = hot > 0.0 ? std::min(1.0, v / hot) : 1.0;
      for (std::uint32_t y = r * cell_px; y < (r + 1) * cell_px; ++y) {
        for (std::uint32_t x = c * cell_px; x < (c + 1) * cell_px; ++x) {
          img.at(x, y, 0) = static_cast<float>(t);
          img.at(x, y, 1) = 0.0f;
          img.at(x, y, 2) = static_cast<float>(1.0 - t);
        }
      }
    }
  }
  return img;
}

nlohmann::json breakdown_to_json(const ScoreBreakdown& breakdown) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : breakdown.records) {
    records.push_back({{"query_cell", {r.query_cell.row, r.query_cell.col}},
                       {"matched_scale", r.matched_scale},
                       {"matched_cell", {r.matched_cell.row, r.matched_cell.col}},
                       {"fs", r.fs},
                       {"sc", r.sc},
                       {"contribution", r.contribution}});
  }
  return {{"total", breakdown.total},
          {"sigma_cells", breakdown.sigma_cells},
          {"orientation", breakdown.orientation.id()},
          {"query_grid", {breakdown.query_height, breakdown.query_width}},
          {"records", std::move(records)}};
}

void export_heatmap(const std::filesystem::path& png_path, const ScoreBreakdown& breakdown, HeatmapTarget target,
                    std::uint32_t cell_px) {
  const ContributionGrid grid = contribution_grid(breakdown, target);
  nlohmann::json doc = breakdown_to_json(breakdown);
  doc["target"] = to_string(target);
  doc["grid"] = {{"height", grid.height}, {"width", grid.width}, {"values", grid.values}};
  save_png(png_path, render_heatmap(grid, cell_px));
  auto sidecar = png_path;
  sidecar += ".json";
  const std::string text = doc.dump(1);
  io::write_file_atomically(sidecar, [&](std::ostream& out) { out << text << '\n'; });
}

}  // namespace wmatch
