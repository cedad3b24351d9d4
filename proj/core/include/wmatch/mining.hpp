#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "wmatch/extractor.hpp"
#include "wmatch/feature_map.hpp"

namespace wmatch {

struct MiningConfig {
  /// Positive threshold in query-grid cells; may be +infinity.
  double tau_cells = 3.0;
  double lambda = 1.0;
  ScaleSet scales;
  std::uint32_t remine_every = 1;

  void validate() const;
};

struct PositivePair {
  CellIndex anchor_cell;
  std::uint32_t matched_scale = 0;
  CellIndex matched_cell;
  double distance = 0.0;  // normalized units
  double fs = 0.0;
};

/// Best match of every nonzero drawing cell in the photo pyramid, kept when
/// its normalized distance is below tau_cells / drawing width. With tau 0 only
/// matches at the identical position are kept. Output is in row-major anchor
/// order; anchors are processed in parallel.
std::vector<PositivePair> mine_positives(const FeatureMap& drawing, const FeaturePyramid& photo,
                                         const MiningConfig& cfg);

struct HardNegative {
  std::uint32_t image = 0;  // index into the candidate list
  std::uint32_t scale_id = 0;
  CellIndex cell;
  double fs = 0.0;
};

/// Global cosine argmax over every cell of every scale of every candidate
/// pyramid. Ties go to the first in (image, scale, row, col) order. Throws
/// Error(invalid_argument) for an empty list.
HardNegative mine_hard_negative(std::span<const float> anchor, std::span<const FeaturePyramid> other_class_pyramids);

/// Reusable hard-negative search over a labelled set of pyramids: each query
/// excludes the pyramids of the anchor's own class.
class NegativePool {
 public:
  /// Pyramids and labels must outlive the pool.
  NegativePool(std::span<const FeaturePyramid> pyramids, std::span<const std::uint32_t> class_of);
  ~NegativePool();
  NegativePool(NegativePool&&) noexcept;
  NegativePool& operator=(NegativePool&&) noexcept;

  /// Throws Error(precondition) when no pyramid of another class exists.
  HardNegative mine(std::span<const float> anchor, std::uint32_t anchor_class) const;
  std::span<const float> feature(const HardNegative& n) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wmatch
