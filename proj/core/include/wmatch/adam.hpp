#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wmatch/adapter.hpp"

namespace wmatch {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;

  void validate() const;
};

/// One bias-corrected Adam update of `params` in place. `step` is the
/// 1-based index of this update. Arithmetic is carried out in double.
void adam_update(std::span<float> params, std::span<float> m, std::span<float> v, std::span<const double> grad,
                 std::uint64_t step, const AdamConfig& cfg);
void adam_update(std::span<double> params, std::span<double> m, std::span<double> v, std::span<const double> grad,
                 std::uint64_t step, const AdamConfig& cfg);

/// Gradient of a scalar loss with respect to the adapter parameters.
struct AdapterGradient {
  std::vector<double> weight;  // dim x dim, row-major
  std::vector<double> bias;
};

/// Returns params after one Adam update, step counter incremented. Refuses
/// (Error(non_finite), input untouched) when any gradient entry is not
/// finite; Error(shape_mismatch) when shapes differ.
AdapterParams adam_step(const AdapterParams& params, const AdapterGradient& grads, const AdamConfig& cfg);

}  // namespace wmatch
