#include "wmatch/mining.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "dense_search.hpp"
#include "wmatch/errors.hpp"
#include "wmatch/match.hpp"

namespace wmatch {

void MiningConfig::validate() const {
  require(tau_cells >= 0.0 && !std::isnan(tau_cells), ErrorCode::invalid_argument, "tau_cells must be >= 0");
  require(lambda > 0.0 && lambda <= 1.0, ErrorCode::invalid_argument, "lambda must lie in (0, 1]");
  require(remine_every >= 1, ErrorCode::invalid_argument, "remine_every must be >= 1");
  scales.validate();
}

std::vector<PositivePair> mine_positives(const FeatureMap& drawing, const FeaturePyramid& photo,
                                         const MiningConfig& cfg) {
  require(cfg.tau_cells >= 0.0 && !std::isnan(cfg.tau_cells), ErrorCode::invalid_argument, "tau_cells must be >= 0");
  require(drawing.dim() == photo.dim(), ErrorCode::shape_mismatch, "drawing and photo dims differ");
  require(!photo.maps.empty(), ErrorCode::invalid_argument, "mining against an empty photo pyramid");
  const double tau = cfg.tau_cells / drawing.width();

  detail::SearchSpace space(photo.dim());
  for (const auto& m : photo.maps) space.add(m);

  std::vector<std::optional<PositivePair>> found(drawing.cell_count());
  // Zero anchors never yield positives; gather the rest contiguously.
  std::vector<std::size_t> anchors;
  for (std::size_t i = 0; i < drawing.cell_count(); ++i) {
    if (!drawing.is_zero_cell(i)) anchors.push_back(i);
  }
  std::vector<float> packed(anchors.size() * drawing.dim());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const auto cell = drawing.cell(anchors[k]);
    std::copy(cell.begin(), cell.end(), packed.begin() + static_cast<std::ptrdiff_t>(k * drawing.dim()));
  }
  constexpr std::size_t kBlock = 64;
  const std::size_t n = anchors.size();
  tbb::parallel_for(std::size_t{0}, (n + kBlock - 1) / kBlock, [&](std::size_t b) {
    const std::size_t first = b * kBlock;
    const std::size_t count = std::min(kBlock, n - first);
    std::vector<float> scratch;
    std::vector<std::vector<detail::SearchHit>> hits;
    space.argmax_sets(std::span<const float>(packed).subspan(first * drawing.dim(), count * drawing.dim()), count,
                      hits, scratch);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = anchors[first + k];
      const CellIndex ac{static_cast<std::uint32_t>(i / drawing.width()), static_cast<std::uint32_t>(i % drawing.width())};
      const GridPosition apos = drawing.center(ac.row, ac.col);
      // Same resolution rule as best_match.
      double best_d2 = INFINITY;
      PositivePair pair;
      for (const auto& h : hits[k]) {
        const FeatureMap& m = space.map(h.entry);
        const CellIndex mc{h.cell / m.width(), h.cell % m.width()};
        const double d2 = squared_distance(apos, m.center(mc.row, mc.col));
        if (d2 < best_d2) {
          best_d2 = d2;
          pair = {ac, m.scale_id(), mc, 0.0, h.fs};
        }
      }
      pair.distance = std::sqrt(best_d2);
      const bool keep = tau == 0.0 ? best_d2 == 0.0 : pair.distance < tau;
      if (keep) found[i] = pair;
    }
  });
  std::vector<PositivePair> out;
  for (auto& f : found) {
    if (f) out.push_back(*f);
  }
  return out;
}

HardNegative mine_hard_negative(std::span<const float> anchor, std::span<const FeaturePyramid> others) {
  require(!others.empty(), ErrorCode::invalid_argument, "hard-negative mining needs at least one candidate pyramid");
  std::vector<std::uint32_t> labels(others.size(), 1);
  NegativePool pool(others, labels);
  return pool.mine(anchor, 0);
}

struct NegativePool::Impl {
  detail::SearchSpace space{1};
  std::vector<std::uint32_t> entry_image;
  std::vector<std::uint32_t> entry_class;
  std::map<std::uint32_t, std::vector<std::uint8_t>> masks;  // anchor class -> allowed entries
  std::vector<std::uint8_t> all_allowed;
};

NegativePool::NegativePool(std::span<const FeaturePyramid> pyramids, std::span<const std::uint32_t> class_of)
    : impl_(std::make_unique<Impl>()) {
  require(pyramids.size() == class_of.size(), ErrorCode::invalid_argument, "one class label per pyramid required");
  require(!pyramids.empty(), ErrorCode::invalid_argument, "negative pool without pyramids");
  const std::uint32_t dim = pyramids.front().dim();
  impl_->space = detail::SearchSpace(dim);
  for (std::uint32_t img = 0; img < pyramids.size(); ++img) {
    require(pyramids[img].dim() == dim, ErrorCode::shape_mismatch, "negative pool pyramids differ in dim");
    for (const auto& m : pyramids[img].maps) {
      impl_->space.add(m);
      impl_->entry_image.push_back(img);
      impl_->entry_class.push_back(class_of[img]);
    }
  }
  for (std::uint32_t c : class_of) {
    if (impl_->masks.count(c)) continue;
    auto& mask = impl_->masks[c];
    for (std::uint32_t ec : impl_->entry_class) mask.push_back(ec != c ? 1 : 0);
  }
  impl_->all_allowed.assign(impl_->entry_class.size(), 1);
}

NegativePool::~NegativePool() = default;
NegativePool::NegativePool(NegativePool&&) noexcept = default;
NegativePool& NegativePool::operator=(NegativePool&&) noexcept = default;

HardNegative NegativePool::mine(std::span<const float> anchor, std::uint32_t anchor_class) const {
  const auto it = impl_->masks.find(anchor_class);
  const auto& mask = it == impl_->masks.end() ? impl_->all_allowed : it->second;
  bool any = false;
  for (auto a : mask) any = any || a != 0;
  require(any, ErrorCode::precondition, "no pyramid of another class available for hard negatives");
  std::vector<float> scratch;
  const auto hits = impl_->space.argmax_set(anchor, scratch, mask);
  const auto& h = hits.front();
  const FeatureMap& m = impl_->space.map(h.entry);
  return {impl_->entry_image[h.entry], m.scale_id(), {h.cell / m.width(), h.cell % m.width()}, h.fs};
}

std::span<const float> NegativePool::feature(const HardNegative& n) const {
  for (std::uint32_t e = 0; e < impl_->entry_image.size(); ++e) {
    if (impl_->entry_image[e] == n.image && impl_->space.map(e).scale_id() == n.scale_id) {
      return impl_->space.map(e).cell(n.cell.row, n.cell.col);
    }
  }
  fail(ErrorCode::invalid_argument, "hard negative does not belong to this pool");
}

}  // namespace wmatch
