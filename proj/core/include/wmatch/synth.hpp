#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmatch/image.hpp"

namespace wmatch {

/// Binary stroke mask, row-major, 1 = watermark stroke.
struct BinaryPattern {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> mask;
  std::string provenance;

  BinaryPattern() = default;
  BinaryPattern(std::uint32_t w, std::uint32_t h) : width(w), height(h), mask(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t& at(std::uint32_t x, std::uint32_t y) { return mask[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return mask[static_cast<std::size_t>(y) * width + x]; }
  std::size_t foreground() const;
  /// Throws Error(invalid_argument) for a zero-size or non-binary mask.
  void validate() const;
};

enum class BackgroundSource { flat, sampled_paper };

struct SynthConfig {
  double blur_sigma = 1.5;
  double noise_low = 0.05;
  double noise_high = 0.35;
  BackgroundSource background = BackgroundSource::sampled_paper;
  double flat_background = 0.55;
  bool clamp = true;

  void validate() const;
};

inline constexpr double kDefaultPlainBackground = 0.55;
inline constexpr double kDefaultStrokeOffset = 0.15;

/// Normalized 1-D Gaussian truncated at radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with a mirrored border (the edge pixel is
/// repeated: index -1 maps to 0). Row-major values in, row-major out.
std::vector<double> gaussian_blur(std::span<const double> values, std::uint32_t width, std::uint32_t height,
                                  double sigma);
std::vector<double> gaussian_blur(const BinaryPattern& pattern, double sigma);

/// Per-pixel uniform field in [lo, hi], drawn row-major from `seed`.
std::vector<double> noise_field(std::uint32_t width, std::uint32_t height, double lo, double hi, std::uint64_t seed);

/// Procedural paper texture: smooth low-frequency shading, faint chain lines
/// and fine grain, mean close to 0.55. Gray, deterministic per seed.
Image paper_background(std::uint32_t width, std::uint32_t height, std::uint64_t seed);

/// Mean gray level of sample photographs.
double mean_intensity(std::span<const Image> photos);

/// Background `background` (default 0.55) with stroke pixels raised by
/// `offset`, clamped to [0, 1]. Gray output.
Image plain_synthetic(const BinaryPattern& pattern, std::optional<double> background = std::nullopt,
                      double offset = kDefaultStrokeOffset);

/// S = B + R * (G * E), optionally clamped, gray output. B is `background`
/// when given (gray, same size), otherwise flat or procedural paper per cfg.
Image randomized_synthetic(const BinaryPattern& pattern, const SynthConfig& cfg, std::uint64_t seed,
                           const Image* background = nullptr);

/// Drawing rendering: black strokes on white.
Image render_drawing(const BinaryPattern& pattern);

}  // namespace wmatch
