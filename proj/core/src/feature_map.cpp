#include "wmatch/feature_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wmatch/errors.hpp"

namespace wmatch {

OrientationId::OrientationId(std::uint32_t id) : id_(id) {
  if (id >= kCount) fail(ErrorCode::invalid_argument, "orientation id " + std::to_string(id) + " outside 0..7");
}

OrientationId OrientationId::from_parts(std::uint32_t rotation_quarters, bool flipped) {
  return OrientationId(rotation_quarters % 4 + (flipped ? 4u : 0u));
}

OrientationId OrientationId::compose(OrientationId first, OrientationId second) {
  // R^b F^g R^a F^f = R^(b + (g ? -a : a)) F^(f xor g)
  const std::uint32_t a = first.rotation();
  const std::uint32_t b = second.rotation();
  const std::uint32_t rot = second.flipped() ? (b + 4 - a) % 4 : (a + b) % 4;
  return from_parts(rot, first.flipped() != second.flipped());
}

OrientationId OrientationId::inverse() const {
  if (flipped()) return *this;
  return from_parts((4 - rotation()) % 4, false);
}

GridPosition cell_center(std::uint32_t row, std::uint32_t col, std::uint32_t height, std::uint32_t width) {
  // Hot path: build the message only on failure.
  if (row >= height || col >= width) {
    fail(ErrorCode::invalid_argument, "cell (" + std::to_string(row) + "," + std::to_string(col) + ") outside " +
                                          std::to_string(height) + "x" + std::to_string(width) + " grid");
  }
  return {(col + 0.5) / width, (row + 0.5) / height};
}

double squared_distance(GridPosition a, GridPosition b) {
  const double du = a.u - b.u;
  const double dv = a.v - b.v;
  return du * du + dv * dv;
}

FeatureMap::FeatureMap(std::uint32_t height, std::uint32_t width, std::uint32_t dim, std::vector<float> data,
                       std::uint32_t scale_id, OrientationId orientation)
    : height_(height), width_(width), dim_(dim), scale_id_(scale_id), orientation_(orientation),
      data_(std::move(data)) {
  require(height >= 1 && width >= 1 && dim >= 1, ErrorCode::shape_mismatch,
          "feature map extents must be positive");
  require(data_.size() == static_cast<std::size_t>(height) * width * dim, ErrorCode::shape_mismatch,
          "feature map data length " + std::to_string(data_.size()) + " != " + std::to_string(height) + "*" +
              std::to_string(width) + "*" + std::to_string(dim));
  zero_mask_.resize(cell_count());
  for (std::size_t i = 0; i < cell_count(); ++i) {
    const auto c = cell(i);
    zero_mask_[i] = std::all_of(c.begin(), c.end(), [](float x) { return x == 0.0f; }) ? 1 : 0;
  }
}

std::span<const float> FeatureMap::cell(std::uint32_t row, std::uint32_t col) const {
  return cell(static_cast<std::size_t>(row) * width_ + col);
}

std::span<const float> FeatureMap::cell(std::size_t flat_index) const {
  return std::span<const float>(data_).subspan(flat_index * dim_, dim_);
}

bool FeatureMap::is_zero_cell(std::uint32_t row, std::uint32_t col) const {
  return zero_mask_[static_cast<std::size_t>(row) * width_ + col] != 0;
}

std::size_t FeatureMap::zero_cell_count() const {
  return static_cast<std::size_t>(std::count(zero_mask_.begin(), zero_mask_.end(), std::uint8_t{1}));
}

FeatureMap FeatureMap::with_labels(std::uint32_t scale_id, OrientationId orientation) const {
  FeatureMap out = *this;
  out.scale_id_ = scale_id;
  out.orientation_ = orientation;
  return out;
}

bool operator==(const FeatureMap& a, const FeatureMap& b) {
  return a.height_ == b.height_ && a.width_ == b.width_ && a.dim_ == b.dim_ && a.scale_id_ == b.scale_id_ &&
         a.orientation_ == b.orientation_ && a.data_ == b.data_;
}

FeatureMap normalize_features(const FeatureMap& map) {
  std::vector<float> out(map.data().begin(), map.data().end());
  const std::uint32_t dim = map.dim();
  for (std::uint32_t r = 0; r < map.height(); ++r) {
    for (std::uint32_t c = 0; c < map.width(); ++c) {
      const std::size_t base = (static_cast<std::size_t>(r) * map.width() + c) * dim;
      double sq = 0.0;
      for (std::uint32_t k = 0; k < dim; ++k) {
        const float x = out[base + k];
        if (!std::isfinite(x)) {
          fail(ErrorCode::non_finite, "non-finite value in cell (" + std::to_string(r) + "," + std::to_string(c) +
                                          "), channel " + std::to_string(k));
        }
        sq += static_cast<double>(x) * x;
      }
      if (sq == 0.0) continue;
      const double inv = 1.0 / std::sqrt(sq);
      for (std::uint32_t k = 0; k < dim; ++k) out[base + k] = static_cast<float>(out[base + k] * inv);
    }
  }
  return FeatureMap(map.height(), map.width(), dim, std::move(out), map.scale_id(), map.orientation());
}

double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::shape_mismatch,
         "cosine: dimension mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  const double na = dot(a, a);
  const double nb = dot(b, b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  // sqrt(na * na) == na in IEEE arithmetic, so identical vectors score exactly 1.
  const double s = dot(a, b) / std::sqrt(na * nb);
  return std::clamp(s, -1.0, 1.0);
}

}  // namespace wmatch
