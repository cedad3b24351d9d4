#include "wmatch/triplet.hpp"

#include <algorithm>
#include <cmath>

#include "wmatch/errors.hpp"

namespace wmatch {
namespace {

void require_lambda(double lambda) {
  require(lambda > 0.0 && lambda <= 1.0, ErrorCode::invalid_argument, "lambda must lie in (0, 1]");
}

double dot_d(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// Cosine of x and y; when g is nonzero, adds g * d cos / dx to gx and
// g * d cos / dy to gy.
double cosine_grad(const double* x, const double* y, std::size_t n, double g, double* gx, double* gy) {
  const double nx2 = dot_d(x, x, n);
  const double ny2 = dot_d(y, y, n);
  if (nx2 == 0.0 || ny2 == 0.0) return 0.0;
  const double inv = 1.0 / std::sqrt(nx2 * ny2);
  const double c = dot_d(x, y, n) * inv;
  if (g != 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      gx[i] += g * (y[i] * inv - c * x[i] / nx2);
      gy[i] += g * (x[i] * inv - c * y[i] / ny2);
    }
  }
  return c;
}

// Gradient multipliers of one triplet term; 0 inside the clipped regions.
double neg_slope(double s_neg, double lambda) { return s_neg < 1.0 - lambda ? 0.0 : 1.0; }
double pos_slope(double s_pos, double lambda) { return s_pos > lambda ? 0.0 : -1.0; }

}  // namespace

void TripletBatch::push(std::span<const float> a, std::span<const float> p, std::span<const float> n,
                        const TripletProvenance& prov) {
  require(dim > 0 && a.size() == dim && p.size() == dim && n.size() == dim, ErrorCode::shape_mismatch,
          "triplet element dims do not match the batch");
  anchors.insert(anchors.end(), a.begin(), a.end());
  positives.insert(positives.end(), p.begin(), p.end());
  negatives.insert(negatives.end(), n.begin(), n.end());
  provenance.push_back(prov);
}

void TripletBatch::validate() const {
  require(dim > 0, ErrorCode::shape_mismatch, "triplet batch without dim");
  require(anchors.size() % dim == 0 && positives.size() == anchors.size() && negatives.size() == anchors.size(),
          ErrorCode::shape_mismatch, "triplet batch: anchor/positive/negative lengths differ");
  require(provenance.empty() || provenance.size() == size(), ErrorCode::shape_mismatch,
          "triplet batch: provenance count differs from triplet count");
}

double triplet_term(double s_pos, double s_neg, double lambda) {
  return std::max(1.0 - lambda, s_neg) - std::min(lambda, s_pos);
}

TripletLoss triplet_loss(const TripletBatch& batch, double lambda) {
  require_lambda(lambda);
  batch.validate();
  require(!batch.empty(), ErrorCode::invalid_argument, "triplet loss of an empty batch");
  const std::size_t d = batch.dim;
  const std::size_t n = batch.size();
  TripletLoss out;
  out.grad_anchors.assign(n * d, 0.0);
  out.grad_positives.assign(n * d, 0.0);
  out.grad_negatives.assign(n * d, 0.0);
  std::vector<double> a(d), p(d), q(d);
  for (std::size_t t = 0; t < n; ++t) {
    std::copy_n(batch.anchors.begin() + t * d, d, a.begin());
    std::copy_n(batch.positives.begin() + t * d, d, p.begin());
    std::copy_n(batch.negatives.begin() + t * d, d, q.begin());
    const double s_pos = cosine_grad(a.data(), p.data(), d, 0.0, nullptr, nullptr);
    const double s_neg = cosine_grad(a.data(), q.data(), d, 0.0, nullptr, nullptr);
    out.loss += triplet_term(s_pos, s_neg, lambda);
    double* ga = out.grad_anchors.data() + t * d;
    cosine_grad(a.data(), p.data(), d, pos_slope(s_pos, lambda), ga, out.grad_positives.data() + t * d);
    cosine_grad(a.data(), q.data(), d, neg_slope(s_neg, lambda), ga, out.grad_negatives.data() + t * d);
  }
  return out;
}

AdapterParamsD AdapterParamsD::from(const AdapterParams& p) {
  p.validate();
  return {p.dim, std::vector<double>(p.weight.begin(), p.weight.end()),
          std::vector<double>(p.bias.begin(), p.bias.end())};
}

AdapterLoss adapter_triplet_loss(const TripletBatch& raw, const AdapterParamsD& params, double lambda,
                                 std::span<const std::uint32_t> subset) {
  require_lambda(lambda);
  raw.validate();
  const std::size_t d = params.dim;
  require(d == raw.dim && params.weight.size() == d * d && params.bias.size() == d, ErrorCode::shape_mismatch,
          "adapter and triplet dims differ");
  const std::size_t count = subset.empty() ? raw.size() : subset.size();
  require(count > 0, ErrorCode::invalid_argument, "adapter loss of an empty batch");

  AdapterLoss out;
  out.grad.weight.assign(d * d, 0.0);
  out.grad.bias.assign(d, 0.0);

  // Per element: x raw, y = W x + b, z = y / |y|, gz = dL/dz.
  struct Elem {
    std::vector<double> x, y, z, gz;
    double norm = 0.0;
  };
  Elem e[3];
  for (auto& el : e) {
    el.x.resize(d);
    el.y.resize(d);
    el.z.resize(d);
    el.gz.resize(d);
  }
  auto forward = [&](Elem& el, std::span<const float> x) {
    for (std::size_t i = 0; i < d; ++i) el.x[i] = x[i];
    for (std::size_t r = 0; r < d; ++r) el.y[r] = params.bias[r] + dot_d(params.weight.data() + r * d, el.x.data(), d);
    el.norm = std::sqrt(dot_d(el.y.data(), el.y.data(), d));
    for (std::size_t i = 0; i < d; ++i) el.z[i] = el.norm > 0.0 ? el.y[i] / el.norm : 0.0;
    std::fill(el.gz.begin(), el.gz.end(), 0.0);
  };
  auto backward = [&](const Elem& el) {
    if (el.norm == 0.0) return;
    // dz/dy = (I - z z^T) / |y|
    const double zg = dot_d(el.z.data(), el.gz.data(), d);
    for (std::size_t r = 0; r < d; ++r) {
      const double gy = (el.gz[r] - el.z[r] * zg) / el.norm;
      if (gy == 0.0) continue;
      out.grad.bias[r] += gy;
      double* gw = out.grad.weight.data() + r * d;
      for (std::size_t c = 0; c < d; ++c) gw[c] += gy * el.x[c];
    }
  };

  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t t = subset.empty() ? k : subset[k];
    require(t < raw.size(), ErrorCode::invalid_argument, "triplet subset index out of range");
    forward(e[0], raw.anchor(t));
    forward(e[1], raw.positive(t));
    forward(e[2], raw.negative(t));
    const double s_pos = cosine_grad(e[0].z.data(), e[1].z.data(), d, 0.0, nullptr, nullptr);
    const double s_neg = cosine_grad(e[0].z.data(), e[2].z.data(), d, 0.0, nullptr, nullptr);
    out.loss += triplet_term(s_pos, s_neg, lambda);
    const double gp = pos_slope(s_pos, lambda);
    const double gn = neg_slope(s_neg, lambda);
    if (gp == 0.0 && gn == 0.0) continue;
    cosine_grad(e[0].z.data(), e[1].z.data(), d, gp, e[0].gz.data(), e[1].gz.data());
    cosine_grad(e[0].z.data(), e[2].z.data(), d, gn, e[0].gz.data(), e[2].gz.data());
    for (const auto& el : e) backward(el);
  }
  return out;
}

}  // namespace wmatch
