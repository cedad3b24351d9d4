#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wmatch/adam.hpp"
#include "wmatch/adapter.hpp"

namespace wmatch {

/// Where a triplet element was taken from: index into TripletBatch::images,
/// scale id and cell.
struct TripletElementRef {
  std::uint32_t image = 0;
  std::uint32_t scale = 0;
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  friend bool operator==(const TripletElementRef&, const TripletElementRef&) = default;
};

struct TripletProvenance {
  TripletElementRef anchor, positive, negative;
  friend bool operator==(const TripletProvenance&, const TripletProvenance&) = default;
};

/// (anchor, positive, negative) feature triplets, stored flat (count x dim).
/// Provenance is either empty or one record per triplet.
struct TripletBatch {
  std::uint32_t dim = 0;
  std::vector<float> anchors, positives, negatives;
  std::vector<TripletProvenance> provenance;
  std::vector<std::string> images;

  std::size_t size() const { return dim == 0 ? 0 : anchors.size() / dim; }
  bool empty() const { return size() == 0; }
  std::span<const float> anchor(std::size_t i) const { return {anchors.data() + i * dim, dim}; }
  std::span<const float> positive(std::size_t i) const { return {positives.data() + i * dim, dim}; }
  std::span<const float> negative(std::size_t i) const { return {negatives.data() + i * dim, dim}; }

  void push(std::span<const float> a, std::span<const float> p, std::span<const float> n,
            const TripletProvenance& prov = {});
  /// Throws Error(shape_mismatch) on inconsistent lengths.
  void validate() const;

  friend bool operator==(const TripletBatch&, const TripletBatch&) = default;
};

/// Loss of one triplet: max(1 - lambda, s_neg) - min(lambda, s_pos).
double triplet_term(double s_pos, double s_neg, double lambda);

struct TripletLoss {
  double loss = 0.0;
  // d loss / d feature, laid out like the batch.
  std::vector<double> grad_anchors, grad_positives, grad_negatives;
};

/// Sum over triplets of triplet_term with s = cosine of the given features.
/// Gradients vanish where a term is clipped (s_neg < 1 - lambda or
/// s_pos > lambda). Throws Error(invalid_argument) for an empty batch or
/// lambda outside (0, 1].
TripletLoss triplet_loss(const TripletBatch& batch, double lambda);

/// Double-precision copy of the adapter parameters, used for gradients and
/// finite-difference checks.
struct AdapterParamsD {
  std::uint32_t dim = 0;
  std::vector<double> weight, bias;
  static AdapterParamsD from(const AdapterParams& p);
};

struct AdapterLoss {
  double loss = 0.0;
  AdapterGradient grad;
};

/// Triplet loss of the adapted features normalize(W x + b), for raw features
/// x taken from `raw`, with the exact gradient with respect to W and b through
/// the affine map and the renormalization. `subset` selects triplets (all when
/// empty); the loss is summed in subset order.
AdapterLoss adapter_triplet_loss(const TripletBatch& raw, const AdapterParamsD& params, double lambda,
                                 std::span<const std::uint32_t> subset = {});

}  // namespace wmatch
