#include "wmatch/adam.hpp"

#include <cmath>
#include <string>

#include "wmatch/errors.hpp"

namespace wmatch {
namespace {

template <typename T>
void update(std::span<T> params, std::span<T> m, std::span<T> v, std::span<const double> grad, std::uint64_t step,
            const AdamConfig& cfg) {
  require(m.size() == params.size() && v.size() == params.size() && grad.size() == params.size(),
          ErrorCode::shape_mismatch, "adam: parameter, moment and gradient sizes differ");
  require(step >= 1, ErrorCode::invalid_argument, "adam: step index starts at 1");
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double m_hat = mi / c1;
    const double v_hat = vi / c2;
    params[i] = static_cast<T>(params[i] - cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
  }
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void AdamConfig::validate() const {
  require(std::isfinite(lr) && lr >= 0.0, ErrorCode::invalid_argument, "adam: learning rate must be >= 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorCode::invalid_argument,
          "adam: betas must lie in [0, 1)");
  require(eps > 0.0, ErrorCode::invalid_argument, "adam: eps must be positive");
}

void adam_update(std::span<float> params, std::span<float> m, std::span<float> v, std::span<const double> grad,
                 std::uint64_t step, const AdamConfig& cfg) {
  update(params, m, v, grad, step, cfg);
}

void adam_update(std::span<double> params, std::span<double> m, std::span<double> v, std::span<const double> grad,
                 std::uint64_t step, const AdamConfig& cfg) {
  update(params, m, v, grad, step, cfg);
}

AdapterParams adam_step(const AdapterParams& params, const AdapterGradient& grads, const AdamConfig& cfg) {
  cfg.validate();
  params.validate();
  require(grads.weight.size() == params.weight.size() && grads.bias.size() == params.bias.size(),
          ErrorCode::shape_mismatch, "adam: gradient shapes do not match the adapter");
  require(all_finite(grads.weight) && all_finite(grads.bias), ErrorCode::non_finite,
          "adam: non-finite gradient, step refused");
  AdapterParams next = params;
  const std::uint64_t step = params.adam.step + 1;
  adam_update(std::span<float>(next.weight), next.adam.m_weight, next.adam.v_weight, grads.weight, step, cfg);
  adam_update(std::span<float>(next.bias), next.adam.m_bias, next.adam.v_bias, grads.bias, step, cfg);
  next.adam.step = step;
  return next;
}

}  // namespace wmatch
