#include "wmatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wmatch/errors.hpp"
#include "wmatch/rng.hpp"

namespace wmatch {
namespace {

std::int64_t mirror(std::int64_t i, std::int64_t n) {
  // Period 2n reflection: -1 -> 0, n -> n - 1.
  const std::int64_t period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace

std::size_t BinaryPattern::foreground() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

void BinaryPattern::validate() const {
  require(width > 0 && height > 0, ErrorCode::invalid_argument, "empty pattern");
  require(mask.size() == static_cast<std::size_t>(width) * height, ErrorCode::shape_mismatch,
          "pattern mask size does not match its extent");
  for (auto v : mask) require(v <= 1, ErrorCode::invalid_argument, "pattern mask must be binary");
}

void SynthConfig::validate() const {
  require(blur_sigma > 0.0 && std::isfinite(blur_sigma), ErrorCode::invalid_argument, "blur_sigma must be positive");
  require(noise_low >= -1.0 && noise_high <= 1.0 && noise_low <= noise_high, ErrorCode::invalid_argument,
          "noise range must satisfy -1 <= low <= high <= 1");
}

std::vector<double> gaussian_kernel(double sigma) {
  require(sigma > 0.0, ErrorCode::invalid_argument, "gaussian sigma must be positive");
  const auto radius = static_cast<std::int64_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (std::int64_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    k[i + radius] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

std::vector<double> gaussian_blur(std::span<const double> values, std::uint32_t width, std::uint32_t height,
                                  double sigma) {
  require(values.size() == static_cast<std::size_t>(width) * height, ErrorCode::shape_mismatch,
          "blur input size does not match extent");
  const auto k = gaussian_kernel(sigma);
  const auto radius = static_cast<std::int64_t>(k.size() / 2);
  std::vector<double> tmp(values.size()), out(values.size());
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      double acc = 0.0;
      for (std::int64_t i = -radius; i <= radius; ++i) acc += k[i + radius] * values[y * width + mirror(x + i, width)];
      tmp[y * width + x] = acc;
    }
  }
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      double acc = 0.0;
      for (std::int64_t i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp[mirror(y + i, height) * width + x];
      out[y * width + x] = acc;
    }
  }
  return out;
}

std::vector<double> gaussian_blur(const BinaryPattern& pattern, double sigma) {
  pattern.validate();
  const std::vector<double> v(pattern.mask.begin(), pattern.mask.end());
  return gaussian_blur(v, pattern.width, pattern.height, sigma);
}

std::vector<double> noise_field(std::uint32_t width, std::uint32_t height, double lo, double hi, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> r(static_cast<std::size_t>(width) * height);
  for (double& v : r) v = uniform(rng, lo, hi);
  return r;
}

Image paper_background(std::uint32_t width, std::uint32_t height, std::uint64_t seed) {
  Rng rng(seed);
  Image img(width, height, 1);
  // A few broad sinusoidal shading components.
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves(4);
  for (auto& w : waves) {
    w.fx = uniform(rng, -2.0, 2.0) / width;
    w.fy = uniform(rng, -2.0, 2.0) / height;
    w.phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    w.amp = uniform(rng, 0.01, 0.03);
  }
  const double base = uniform(rng, 0.5, 0.6);
  const double chain_spacing = uniform(rng, 20.0, 30.0);
  const double chain_offset = uniform(rng, 0.0, chain_spacing);
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      double v = base;
      for (const auto& w : waves) v += w.amp * std::sin(2.0 * std::numbers::pi * (w.fx * x + w.fy * y) + w.phase);
      const double d = std::fmod(x + chain_offset, chain_spacing);
      if (d < 1.0) v += 0.03;  // chain line
      v += uniform(rng, -0.02, 0.02);
      img.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  img.provenance = "paper_background(seed=" + std::to_string(seed) + ")";
  return img;
}

double mean_intensity(std::span<const Image> photos) {
  require(!photos.empty(), ErrorCode::invalid_argument, "mean intensity of no photographs");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : photos) {
    const Image g = to_gray(p);
    for (float v : g.pixels) sum += v;
    n += g.pixels.size();
  }
  return sum / static_cast<double>(n);
}

Image plain_synthetic(const BinaryPattern& pattern, std::optional<double> background, double offset) {
  pattern.validate();
  const double bg = background.value_or(kDefaultPlainBackground);
  Image img(pattern.width, pattern.height, 1);
  for (std::size_t i = 0; i < pattern.mask.size(); ++i) {
    img.pixels[i] = static_cast<float>(std::clamp(bg + (pattern.mask[i] ? offset : 0.0), 0.0, 1.0));
  }
  img.provenance = pattern.provenance + " | plain_synthetic";
  return img;
}

Image randomized_synthetic(const BinaryPattern& pattern, const SynthConfig& cfg, std::uint64_t seed,
                           const Image* background) {
  pattern.validate();
  cfg.validate();
  const std::uint32_t w = pattern.width, h = pattern.height;
  Image b;
  if (background) {
    b = to_gray(*background);
    require(b.width == w && b.height == h, ErrorCode::shape_mismatch, "background size differs from pattern");
  } else if (cfg.background == BackgroundSource::flat) {
    b = Image(w, h, 1, static_cast<float>(cfg.flat_background));
  } else {
    b = paper_background(w, h, derive_seed(seed, 2));
  }
  const auto blurred = gaussian_blur(pattern, cfg.blur_sigma);
  const auto r = noise_field(w, h, cfg.noise_low, cfg.noise_high, derive_seed(seed, 1));
  Image out(w, h, 1);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    double s = b.pixels[i] + r[i] * blurred[i];
    if (cfg.clamp) s = std::clamp(s, 0.0, 1.0);
    out.pixels[i] = static_cast<float>(s);
  }
  out.provenance = pattern.provenance + " | randomized_synthetic(seed=" + std::to_string(seed) + ")";
  return out;
}

Image render_drawing(const BinaryPattern& pattern) {
  pattern.validate();
  Image img(pattern.width, pattern.height, 1);
  for (std::size_t i = 0; i < pattern.mask.size(); ++i) img.pixels[i] = pattern.mask[i] ? 0.0f : 1.0f;
  img.provenance = pattern.provenance + " | drawing";
  return img;
}

}  // namespace wmatch
