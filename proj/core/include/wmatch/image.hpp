#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wmatch {

/// Axis-aligned rectangle in pixel units of the image it refers to.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;
};

/// Interleaved float image, channels 1 (gray) or 3 (RGB), values in [0, 1].
struct Image {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 1;
  std::vector<float> pixels;
  /// Source path plus the transforms applied so far, for diagnostics.
  std::string provenance;

  Image() = default;
  Image(std::uint32_t w, std::uint32_t h, std::uint32_t c, float fill = 0.0f);

  float& at(std::uint32_t x, std::uint32_t y, std::uint32_t c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(std::uint32_t x, std::uint32_t y, std::uint32_t c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool square() const { return width == height; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  friend bool operator==(const Image& a, const Image& b) {
    return a.width == b.width && a.height == b.height && a.channels == b.channels && a.pixels == b.pixels;
  }
};

/// Bilinear resampling with half-pixel centers and clamped borders. Same-size
/// resizes return an exact copy.
Image resize_bilinear(const Image& src, std::uint32_t width, std::uint32_t height);

/// Square crop of side `side` centered on the image center.
Image center_crop(const Image& src, std::uint32_t side);

Image to_gray(const Image& src);

/// Per-channel mean, accumulated in double.
std::vector<double> channel_means(const Image& src);

void clamp_unit(Image& img);

}  // namespace wmatch
