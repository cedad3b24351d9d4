#pragma once

// Exhaustive nearest-cell search over a list of feature maps.
//
// Candidates are first ranked by a fast float dot product (one GEMM of a block
// of unit-normalized queries against all unit-normalized cells). Every cell whose coarse score lies within
// a small window of the coarse maximum is then rescored with the exact
// `cosine`, and the set of cells attaining the exact maximum is returned.
// Results are therefore identical to a plain scan with `cosine`, including
// exact ties.

#include <cstdint>
#include <span>
#include <vector>

#include "wmatch/feature_map.hpp"

namespace wmatch::detail {

struct SearchHit {
  std::uint32_t entry = 0;  // index of the map in insertion order
  std::uint32_t cell = 0;   // flat row-major cell index within that map
  double fs = 0.0;
};

class SearchSpace {
 public:
  explicit SearchSpace(std::uint32_t dim) : dim_(dim) {}

  /// The map must outlive the search space.
  void add(const FeatureMap& map);

  std::uint32_t dim() const { return dim_; }
  std::size_t cell_count() const { return offsets_.back(); }
  std::size_t entry_count() const { return maps_.size(); }
  const FeatureMap& map(std::uint32_t entry) const { return *maps_[entry]; }

  /// All cells attaining the maximal exact cosine with `query`, ordered by
  /// (entry, cell). `scratch` is resized as needed and may be reused. When
  /// `allowed` is nonempty, only entries with allowed[entry] != 0 take part.
  std::vector<SearchHit> argmax_set(std::span<const float> query, std::vector<float>& scratch,
                                    std::span<const std::uint8_t> allowed = {}) const;

  /// Batched form: `queries` holds count x dim values, out[i] receives the
  /// argmax set of query i.
  void argmax_sets(std::span<const float> queries, std::size_t count, std::vector<std::vector<SearchHit>>& out,
                   std::vector<float>& scratch, std::span<const std::uint8_t> allowed = {}) const;

 private:
  std::uint32_t dim_;
  std::vector<const FeatureMap*> maps_;
  std::vector<std::size_t> offsets_{0};  // offsets_[e]: first global cell of entry e
  std::vector<float> unit_;              // cell-major, cell_count x dim
  std::vector<float> unit_cm_;           // small dims: channel-major per tile
};

}  // namespace wmatch::detail
