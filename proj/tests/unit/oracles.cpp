#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oracle {

double gaussian(Rng& rng) {
  const double u1 = 1.0 - wmatch::uniform01(rng);
  const double u2 = wmatch::uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

FeatureMap random_raw_map(Rng& rng, std::uint32_t h, std::uint32_t w, std::uint32_t dim, double zero_fraction,
                          std::uint32_t scale_id) {
  std::vector<float> data(static_cast<std::size_t>(h) * w * dim);
  for (std::size_t cell = 0; cell < static_cast<std::size_t>(h) * w; ++cell) {
    const bool zero = wmatch::uniform01(rng) < zero_fraction;
    for (std::uint32_t c = 0; c < dim; ++c) data[cell * dim + c] = zero ? 0.0f : static_cast<float>(gaussian(rng));
  }
  return FeatureMap(h, w, dim, std::move(data), scale_id);
}

FeatureMap random_unit_map(Rng& rng, std::uint32_t h, std::uint32_t w, std::uint32_t dim, double zero_fraction,
                           std::uint32_t scale_id) {
  return wmatch::normalize_features(random_raw_map(rng, h, w, dim, zero_fraction, scale_id));
}

FeaturePyramid random_pyramid(Rng& rng, const std::vector<std::uint32_t>& sides, std::uint32_t dim,
                              double zero_fraction) {
  FeaturePyramid p;
  for (std::uint32_t s = 0; s < sides.size(); ++s) {
    p.maps.push_back(random_unit_map(rng, sides[s], sides[s], dim, zero_fraction, s));
  }
  return p;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<long double>(a[i]) * b[i];
    aa += static_cast<long double>(a[i]) * a[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return static_cast<double>(ab / (std::sqrt(aa) * std::sqrt(bb)));
}

Match best_match(std::span<const float> feature, double u, double v, const FeaturePyramid& pyramid) {
  Match best;
  best.fs = -3.0;
  double best_d2 = 0.0;
  for (std::uint32_t m = 0; m < pyramid.maps.size(); ++m) {
    const FeatureMap& map = pyramid.maps[m];
    for (std::uint32_t r = 0; r < map.height(); ++r) {
      for (std::uint32_t c = 0; c < map.width(); ++c) {
        const double fs = cosine(feature, map.cell(r, c));
        const double mu = (c + 0.5) / map.width(), mv = (r + 0.5) / map.height();
        const double d2 = (mu - u) * (mu - u) + (mv - v) * (mv - v);
        if (fs > best.fs || (fs == best.fs && d2 < best_d2)) {
          best = {m, r, c, fs, mu, mv};
          best_d2 = d2;
        }
      }
    }
  }
  return best;
}

double score_pair(const FeatureMap& query, const FeaturePyramid& pyramid, double sigma_cells) {
  const double sigma = sigma_cells / query.width();
  long double total = 0;
  for (std::uint32_t r = 0; r < query.height(); ++r) {
    for (std::uint32_t c = 0; c < query.width(); ++c) {
      const double u = (c + 0.5) / query.width(), v = (r + 0.5) / query.height();
      const Match m = best_match(query.cell(r, c), u, v, pyramid);
      const double d2 = (m.u - u) * (m.u - u) + (m.v - v) * (m.v - v);
      total += m.fs * std::exp(-d2 / (2.0 * sigma * sigma));
    }
  }
  return static_cast<double>(total);
}

std::vector<double> synth(const std::vector<std::uint8_t>& mask, std::uint32_t w, std::uint32_t h, double sigma,
                          const std::vector<double>& r, const std::vector<double>& b) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k1;
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k1.push_back(std::exp(-(i * i) / (2.0 * sigma * sigma)));
    ksum += k1.back();
  }
  for (auto& k : k1) k /= ksum;
  auto mirror = [](int i, int n) {
    // ... -2 -> 1, -1 -> 0, n -> n-1, n+1 -> n-2 ...
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
  };
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < static_cast<int>(h); ++y) {
    for (int x = 0; x < static_cast<int>(w); ++x) {
      double g = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const int sx = mirror(x + dx, static_cast<int>(w)), sy = mirror(y + dy, static_cast<int>(h));
          g += k1[dx + radius] * k1[dy + radius] * mask[static_cast<std::size_t>(sy) * w + sx];
        }
      }
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      out[i] = std::clamp(b[i] + r[i] * g, 0.0, 1.0);
    }
  }
  return out;
}

Negative hard_negative(std::span<const float> anchor, std::span<const FeaturePyramid> pyramids) {
  Negative best;
  for (std::uint32_t i = 0; i < pyramids.size(); ++i) {
    for (const auto& map : pyramids[i].maps) {
      for (std::uint32_t r = 0; r < map.height(); ++r) {
        for (std::uint32_t c = 0; c < map.width(); ++c) {
          const double fs = cosine(anchor, map.cell(r, c));
          if (fs > best.fs) best = {i, map.scale_id(), r, c, fs};
        }
      }
    }
  }
  return best;
}

namespace {

std::vector<long double> adapt(std::span<const float> x, std::uint32_t dim, const std::vector<double>& weight,
                               const std::vector<double>& bias) {
  std::vector<long double> y(dim);
  long double n2 = 0;
  for (std::uint32_t i = 0; i < dim; ++i) {
    long double acc = bias[i];
    for (std::uint32_t j = 0; j < dim; ++j) acc += static_cast<long double>(weight[i * dim + j]) * x[j];
    y[i] = acc;
    n2 += acc * acc;
  }
  const long double n = std::sqrt(n2);
  for (auto& v : y) v /= n;
  return y;
}

long double cos_unit(const std::vector<long double>& a, const std::vector<long double>& b) {
  long double ab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ab += a[i] * b[i];
  return ab;
}

}  // namespace

double adapter_loss(std::span<const float> anchors, std::span<const float> positives, std::span<const float> negatives,
                    std::uint32_t dim, const std::vector<double>& weight, const std::vector<double>& bias,
                    double lambda) {
  long double loss = 0;
  for (std::size_t t = 0; t < anchors.size() / dim; ++t) {
    const auto a = adapt(anchors.subspan(t * dim, dim), dim, weight, bias);
    const auto p = adapt(positives.subspan(t * dim, dim), dim, weight, bias);
    const auto n = adapt(negatives.subspan(t * dim, dim), dim, weight, bias);
    loss += std::max<long double>(1.0L - lambda, cos_unit(a, n)) - std::min<long double>(lambda, cos_unit(a, p));
  }
  return static_cast<double>(loss);
}

}  // namespace oracle
