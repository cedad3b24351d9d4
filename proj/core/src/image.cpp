#include "wmatch/image.hpp"

#include <algorithm>
#include <cmath>

#include "wmatch/errors.hpp"

namespace wmatch {

Image::Image(std::uint32_t w, std::uint32_t h, std::uint32_t c, float fill)
    : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, fill) {}

namespace {

struct Tap {
  std::uint32_t i0;
  std::uint32_t i1;
  float w1;
};

std::vector<Tap> make_taps(std::uint32_t src, std::uint32_t dst) {
  std::vector<Tap> taps(dst);
  const double scale = static_cast<double>(src) / dst;
  for (std::uint32_t d = 0; d < dst; ++d) {
    double s = (d + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const auto i0 = static_cast<std::uint32_t>(std::floor(s));
    const std::uint32_t i1 = std::min(i0 + 1, src - 1);
    taps[d] = {i0, i1, static_cast<float>(s - i0)};
  }
  return taps;
}

}  // namespace

Image resize_bilinear(const Image& src, std::uint32_t width, std::uint32_t height) {
  require(src.width > 0 && src.height > 0, ErrorCode::invalid_argument, "resize of empty image");
  require(width > 0 && height > 0, ErrorCode::invalid_argument, "resize to empty extent");
  if (width == src.width && height == src.height) return src;

  const auto tx = make_taps(src.width, width);
  const auto ty = make_taps(src.height, height);
  Image out(width, height, src.channels);
  out.provenance = src.provenance;
  for (std::uint32_t y = 0; y < height; ++y) {
    const Tap& vy = ty[y];
    for (std::uint32_t x = 0; x < width; ++x) {
      const Tap& vx = tx[x];
      for (std::uint32_t c = 0; c < src.channels; ++c) {
        const float a = src.at(vx.i0, vy.i0, c);
        const float b = src.at(vx.i1, vy.i0, c);
        const float d = src.at(vx.i0, vy.i1, c);
        const float e = src.at(vx.i1, vy.i1, c);
        const float top = a + (b - a) * vx.w1;
        const float bottom = d + (e - d) * vx.w1;
        out.at(x, y, c) = top + (bottom - top) * vy.w1;
      }
    }
  }
  return out;
}

Image center_crop(const Image& src, std::uint32_t side) {
  require(side <= src.width && side <= src.height, ErrorCode::invalid_argument,
          "center crop of " + std::to_string(side) + " exceeds image");
  const std::uint32_t x0 = (src.width - side) / 2;
  const std::uint32_t y0 = (src.height - side) / 2;
  Image out(side, side, src.channels);
  out.provenance = src.provenance + "|crop" + std::to_string(side);
  for (std::uint32_t y = 0; y < side; ++y) {
    const float* row = &src.pixels[((static_cast<std::size_t>(y0 + y)) * src.width + x0) * src.channels];
    std::copy(row, row + static_cast<std::size_t>(side) * src.channels,
              &out.pixels[static_cast<std::size_t>(y) * side * src.channels]);
  }
  return out;
}

Image to_gray(const Image& src) {
  if (src.channels == 1) return src;
  require(src.channels == 3, ErrorCode::unsupported, "expected 1 or 3 channels");
  Image out(src.width, src.height, 1);
  out.provenance = src.provenance;
  for (std::size_t i = 0; i < src.pixel_count(); ++i) {
    const float* p = &src.pixels[i * 3];
    out.pixels[i] = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
  }
  return out;
}

std::vector<double> channel_means(const Image& src) {
  std::vector<double> sums(src.channels, 0.0);
  for (std::size_t i = 0; i < src.pixel_count(); ++i) {
    for (std::uint32_t c = 0; c < src.channels; ++c) sums[c] += src.pixels[i * src.channels + c];
  }
  const double n = static_cast<double>(std::max<std::size_t>(src.pixel_count(), 1));
  for (double& s : sums) s /= n;
  return sums;
}

void clamp_unit(Image& img) {
  for (float& p : img.pixels) p = std::clamp(p, 0.0f, 1.0f);
}

}  // namespace wmatch
