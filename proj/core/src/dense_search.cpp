#include "dense_search.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <utility>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include "wmatch/errors.hpp"

namespace wmatch::detail {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Upper bound on |coarse - exact| for unit vectors, with margin.
double coarse_window(std::uint32_t dim) { return 1e-4 + 4e-7 * dim; }

constexpr std::size_t kTile = 1024;
constexpr std::uint32_t kMaxSmallDim = 32;

// out[j] = sum_c q[c] * tile[c * n + j], with D fixed so the channel loop
// unrolls and the cell loop vectorizes.
template <std::uint32_t D>
void small_dot(const float* q, const float* tile, std::size_t n, float* out) {
  constexpr std::size_t kLanes = 16;
  std::size_t j = 0;
  for (; j + kLanes <= n; j += kLanes) {
    float acc[kLanes] = {};
    for (std::uint32_t c = 0; c < D; ++c) {
      const float qc = q[c];
      const float* t = tile + c * n + j;
      for (std::size_t l = 0; l < kLanes; ++l) acc[l] += qc * t[l];
    }
    for (std::size_t l = 0; l < kLanes; ++l) out[j + l] = acc[l];
  }
  for (; j < n; ++j) {
    float a = 0.0f;
    for (std::uint32_t c = 0; c < D; ++c) a += q[c] * tile[c * n + j];
    out[j] = a;
  }
}

constexpr std::size_t kChunk = 16;

bool any_at_least(const float* x, float cut) {
  int any = 0;
  for (std::size_t l = 0; l < kChunk; ++l) any |= x[l] >= cut;
  return any != 0;
}

using SmallDot = void (*)(const float*, const float*, std::size_t, float*);

template <std::size_t... I>
constexpr std::array<SmallDot, sizeof...(I)> small_dot_table(std::index_sequence<I...>) {
  return {&small_dot<static_cast<std::uint32_t>(I + 1)>...};
}

constexpr auto kSmallDot = small_dot_table(std::make_index_sequence<kMaxSmallDim>{});

// Returns false for a zero vector.
bool unit_copy(std::span<const float> v, float* out) {
  const double norm2 = dot(v, v);
  if (norm2 == 0.0) {
    std::fill(out, out + v.size(), 0.0f);
    return false;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::size_t c = 0; c < v.size(); ++c) out[c] = static_cast<float>(v[c] * inv);
  return true;
}

}  // namespace

void SearchSpace::add(const FeatureMap& map) {
  require(map.dim() == dim_, ErrorCode::shape_mismatch,
          "feature dim " + std::to_string(map.dim()) + " does not match search dim " + std::to_string(dim_));
  const std::size_t n = map.cell_count();
  const std::size_t first = cell_count();
  unit_.resize((first + n) * dim_);
  for (std::size_t i = 0; i < n; ++i) unit_copy(map.cell(i), unit_.data() + (first + i) * dim_);
  maps_.push_back(&map);
  offsets_.push_back(first + n);
  if (dim_ <= kMaxSmallDim) {
    // Channel-major copy per tile for the small-dim kernel.
    unit_cm_.resize((first + n) * dim_);
    for (std::size_t t = 0; t < n; t += kTile) {
      const std::size_t len = std::min(kTile, n - t);
      float* dst = unit_cm_.data() + (first + t) * dim_;
      const float* src = unit_.data() + (first + t) * dim_;
      for (std::size_t j = 0; j < len; ++j) {
        for (std::uint32_t c = 0; c < dim_; ++c) dst[c * len + j] = src[j * dim_ + c];
      }
    }
  }
}

std::vector<SearchHit> SearchSpace::argmax_set(std::span<const float> query, std::vector<float>& scratch,
                                               std::span<const std::uint8_t> allowed) const {
  require(query.size() == dim_, ErrorCode::shape_mismatch, "query dim does not match search dim");
  std::vector<std::vector<SearchHit>> out;
  argmax_sets(query, 1, out, scratch, allowed);
  return std::move(out.front());
}

void SearchSpace::argmax_sets(std::span<const float> queries, std::size_t count,
                              std::vector<std::vector<SearchHit>>& out, std::vector<float>& scratch,
                              std::span<const std::uint8_t> allowed) const {
  require(queries.size() == count * dim_, ErrorCode::shape_mismatch, "query dim does not match search dim");
  require(allowed.empty() || allowed.size() == maps_.size(), ErrorCode::invalid_argument,
          "search filter size does not match the entry count");
  const std::size_t entries = maps_.size();
  auto usable = [&](std::size_t e) { return allowed.empty() || allowed[e] != 0; };
  std::size_t usable_cells = 0;
  for (std::size_t e = 0; e < entries; ++e) {
    if (usable(e)) usable_cells += offsets_[e + 1] - offsets_[e];
  }
  require(usable_cells > 0, ErrorCode::invalid_argument, "search over an empty set of cells");

  RowMatrix q(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim_));
  std::vector<char> nonzero(count);
  for (std::size_t i = 0; i < count; ++i) {
    nonzero[i] = unit_copy(queries.subspan(i * dim_, dim_), q.data() + i * dim_);
  }

  // Coarse pass over cache-sized tiles of reference cells. Per query, keep
  // the running coarse maximum and every cell that was within the window of
  // the maximum at the time it was seen; the final filter happens below.
  const float window = static_cast<float>(coarse_window(dim_));
  std::vector<float> coarse_max(count, -INFINITY);
  std::vector<std::vector<std::pair<std::uint32_t, float>>> candidates(count);
  scratch.resize(count * kTile);
  for (std::size_t e = 0; e < entries; ++e) {
    if (!usable(e)) continue;
    for (std::size_t first = offsets_[e]; first < offsets_[e + 1]; first += kTile) {
      const std::size_t n = std::min(kTile, offsets_[e + 1] - first);
      Eigen::Map<RowMatrix> tile(scratch.data(), static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(n));
      if (dim_ <= kMaxSmallDim) {
        const SmallDot kernel = kSmallDot[dim_ - 1];
        for (std::size_t i = 0; i < count; ++i) {
          kernel(q.data() + i * dim_, unit_cm_.data() + first * dim_, n, scratch.data() + i * n);
        }
      } else {
        Eigen::Map<const RowMatrix> cells(unit_.data() + first * dim_, static_cast<Eigen::Index>(n),
                                          static_cast<Eigen::Index>(dim_));
        tile.noalias() = q * cells.transpose();
      }
      for (std::size_t i = 0; i < count; ++i) {
        if (!nonzero[i]) continue;
        const float* row = scratch.data() + i * n;
        const float m = std::max(coarse_max[i], tile.row(static_cast<Eigen::Index>(i)).maxCoeff());
        coarse_max[i] = m;
        const float cut = m - window;
        auto& cand = candidates[i];
        for (std::size_t j0 = 0; j0 < n; j0 += kChunk) {
          const std::size_t end = std::min(n, j0 + kChunk);
          if (end - j0 == kChunk && !any_at_least(row + j0, cut)) continue;
          for (std::size_t j = j0; j < end; ++j) {
            if (row[j] >= cut) cand.emplace_back(static_cast<std::uint32_t>(first + j), row[j]);
          }
        }
      }
    }
  }

  out.assign(count, {});
  for (std::size_t i = 0; i < count; ++i) {
    auto& hits = out[i];
    if (!nonzero[i]) {
      // Cosine with a zero vector is 0 everywhere.
      hits.reserve(usable_cells);
      for (std::uint32_t e = 0; e < entries; ++e) {
        if (!usable(e)) continue;
        const auto n = static_cast<std::uint32_t>(offsets_[e + 1] - offsets_[e]);
        for (std::uint32_t c = 0; c < n; ++c) hits.push_back({e, c, 0.0});
      }
      continue;
    }
    const auto query = queries.subspan(i * dim_, dim_);
    const double threshold = coarse_max[i] - coarse_window(dim_);
    double best = -2.0;
    std::uint32_t e = 0;
    // Flat regions produce many bit-identical cells; identical vectors share
    // a coarse score, so reuse the exact cosine of the last one seen.
    std::unordered_map<float, std::pair<const float*, double>> seen;
    for (const auto& [g, score] : candidates[i]) {  // increasing global index
      if (score < threshold) continue;
      while (g >= offsets_[e + 1]) ++e;
      const std::uint32_t c = g - static_cast<std::uint32_t>(offsets_[e]);
      const auto cell = maps_[e]->cell(c);
      auto [it, fresh] = seen.try_emplace(score, cell.data(), 0.0);
      if (fresh || std::memcmp(it->second.first, cell.data(), dim_ * sizeof(float)) != 0) {
        it->second = {cell.data(), cosine(query, cell)};
      }
      const double fs = it->second.second;
      if (fs > best) {
        best = fs;
        hits.clear();
      }
      if (fs == best) hits.push_back({e, c, fs});
    }
  }
}

}  // namespace wmatch::detail
