#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wmatch {

/// One of the eight reference transforms: a horizontal flip (optional)
/// followed by a counter-clockwise rotation by `rotation() * 90` degrees.
/// The encoded id is `rotation + 4 * flip`.
class OrientationId {
 public:
  static constexpr std::uint32_t kCount = 8;

  constexpr OrientationId() = default;
  /// Throws Error(invalid_argument) for ids outside 0..7.
  explicit OrientationId(std::uint32_t id);
  static OrientationId from_parts(std::uint32_t rotation_quarters, bool flipped);

  constexpr std::uint32_t id() const noexcept { return id_; }
  constexpr std::uint32_t rotation() const noexcept { return id_ % 4; }
  constexpr bool flipped() const noexcept { return id_ >= 4; }

  /// Transform equivalent to applying `first` and then `second`.
  static OrientationId compose(OrientationId first, OrientationId second);
  OrientationId inverse() const;

  friend constexpr bool operator==(OrientationId, OrientationId) = default;

 private:
  std::uint32_t id_ = 0;
};

/// Cell position normalized to the unit square of its grid.
struct GridPosition {
  double u = 0.0;
  double v = 0.0;
};

struct CellIndex {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  friend constexpr bool operator==(CellIndex, CellIndex) = default;
};

/// Center of cell (row, col): u = (col + 0.5) / width, v = (row + 0.5) / height.
GridPosition cell_center(std::uint32_t row, std::uint32_t col, std::uint32_t height, std::uint32_t width);

double squared_distance(GridPosition a, GridPosition b);

/// Dense H x W grid of D-dimensional descriptors stored row-major as
/// (row, col, channel). Immutable once constructed; a cell whose channels are
/// all exactly zero is recorded in the zero-cell mask.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::uint32_t height, std::uint32_t width, std::uint32_t dim, std::vector<float> data,
             std::uint32_t scale_id = 0, OrientationId orientation = {});

  std::uint32_t height() const noexcept { return height_; }
  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t dim() const noexcept { return dim_; }
  std::uint32_t scale_id() const noexcept { return scale_id_; }
  OrientationId orientation() const noexcept { return orientation_; }
  std::size_t cell_count() const noexcept { return static_cast<std::size_t>(height_) * width_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> cell(std::uint32_t row, std::uint32_t col) const;
  std::span<const float> cell(std::size_t flat_index) const;
  bool is_zero_cell(std::uint32_t row, std::uint32_t col) const;
  bool is_zero_cell(std::size_t flat_index) const { return zero_mask_[flat_index] != 0; }
  std::span<const std::uint8_t> zero_mask() const noexcept { return zero_mask_; }
  std::size_t zero_cell_count() const;

  GridPosition center(std::uint32_t row, std::uint32_t col) const {
    return cell_center(row, col, height_, width_);
  }

  FeatureMap with_labels(std::uint32_t scale_id, OrientationId orientation) const;

  friend bool operator==(const FeatureMap& a, const FeatureMap& b);

 private:
  std::uint32_t height_ = 0;
  std::uint32_t width_ = 0;
  std::uint32_t dim_ = 0;
  std::uint32_t scale_id_ = 0;
  OrientationId orientation_{};
  std::vector<float> data_;
  std::vector<std::uint8_t> zero_mask_;
};

/// Divides every nonzero cell by its L2 norm; zero cells stay zero and are
/// flagged in the zero-cell mask. Throws Error(non_finite) naming the first
/// offending cell.
FeatureMap normalize_features(const FeatureMap& map);

/// Dot product accumulated in double, always in channel order. Identical
/// inputs therefore give bit-identical results regardless of call site.
double dot(std::span<const float> a, std::span<const float> b);

/// a.b / (|a||b|), 0 when either norm is zero, clamped to [-1, 1].
/// Throws Error(shape_mismatch) when the lengths differ.
double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace wmatch
