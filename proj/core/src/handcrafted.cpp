#include "wmatch/handcrafted.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "wmatch/errors.hpp"

namespace wmatch {
namespace {
const std::vector<double> kSmoothTaps = {1, 4, 6, 4, 1};
}

int gradient_bin(float gx, float gy) {
  if (gx == 0.0f && gy == 0.0f) return -1;
  // Half-open quadrants; each is rotated back onto the first one, where the
  // 45-degree diagonal splits it into two bins.
  int quadrant;
  float a;
  float b;
  if (gx > 0.0f && gy >= 0.0f) {
    quadrant = 0; a = gx; b = gy;
  } else if (gx <= 0.0f && gy > 0.0f) {
    quadrant = 1; a = gy; b = -gx;
  } else if (gx < 0.0f && gy <= 0.0f) {
    quadrant = 2; a = -gx; b = -gy;
  } else {
    quadrant = 3; a = -gy; b = gx;
  }
  return 2 * quadrant + (b >= a ? 1 : 0);
}

FeatureMap handcrafted_test_extract(const Image& img, std::uint32_t grid) {
  require(img.square(), ErrorCode::invalid_argument, "handcrafted extractor needs a square image");
  require(grid >= 1 && grid <= img.width, ErrorCode::invalid_argument,
          "grid " + std::to_string(grid) + " larger than image side " + std::to_string(img.width));
  const Image gray = to_gray(img);
  const std::uint32_t n = gray.width;

  double total = 0.0;
  for (float p : gray.pixels) total += p;
  const double image_mean = total / static_cast<double>(gray.pixel_count());

  std::vector<std::uint32_t> cell_of(n);
  std::vector<std::uint32_t> cell_size(grid, 0);
  for (std::uint32_t c = 0; c < grid; ++c) {
    const std::uint32_t begin = static_cast<std::uint32_t>(static_cast<std::uint64_t>(c) * n / grid);
    const std::uint32_t end = static_cast<std::uint32_t>(static_cast<std::uint64_t>(c + 1) * n / grid);
    for (std::uint32_t i = begin; i < end; ++i) cell_of[i] = c;
    cell_size[c] = end - begin;
  }

  // Gradients are taken on a binomially smoothed copy (replicated border).
  // Every intermediate is exact in double, so the result commutes exactly
  // with quarter-turns and flips.
  const std::vector<double> taps = kSmoothTaps;
  const int half = static_cast<int>(taps.size() / 2);
  double weight = 0.0;
  for (double t : taps) weight += t;
  const std::uint32_t last = n - 1;
  auto clampi = [&](int i) { return static_cast<std::uint32_t>(std::clamp(i, 0, static_cast<int>(last))); };
  std::vector<double> rows(gray.pixel_count());
  std::vector<double> smooth(gray.pixel_count());
  for (std::uint32_t y = 0; y < n; ++y) {
    for (std::uint32_t x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k) acc += taps[k + half] * gray.at(clampi(static_cast<int>(x) + k), y);
      rows[static_cast<std::size_t>(y) * n + x] = acc;
    }
  }
  for (std::uint32_t y = 0; y < n; ++y) {
    for (std::uint32_t x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k) acc += taps[k + half] * rows[static_cast<std::size_t>(clampi(static_cast<int>(y) + k)) * n + x];
      smooth[static_cast<std::size_t>(y) * n + x] = acc / (weight * weight);
    }
  }
  auto at = [&](std::uint32_t x, std::uint32_t y) { return smooth[static_cast<std::size_t>(y) * n + x]; };

  std::vector<double> hist(static_cast<std::size_t>(grid) * grid * 8, 0.0);
  std::vector<double> intensity(static_cast<std::size_t>(grid) * grid, 0.0);
  for (std::uint32_t y = 0; y < n; ++y) {
    const std::uint32_t ym = y == 0 ? 0 : y - 1;
    const std::uint32_t yp = std::min(y + 1, last);
    for (std::uint32_t x = 0; x < n; ++x) {
      const std::uint32_t xm = x == 0 ? 0 : x - 1;
      const std::uint32_t xp = std::min(x + 1, last);
      const auto gx = static_cast<float>(at(xp, y) - at(xm, y));
      const auto gy = static_cast<float>(at(x, yp) - at(x, ym));
      const std::size_t cell = static_cast<std::size_t>(cell_of[y]) * grid + cell_of[x];
      intensity[cell] += gray.at(x, y);
      const int bin = gradient_bin(gx, gy);
      if (bin >= 0) hist[cell * 8 + bin] += std::sqrt(gx * gx + gy * gy);
    }
  }

  std::vector<float> data(static_cast<std::size_t>(grid) * grid * kHandcraftedDim);
  for (std::uint32_t r = 0; r < grid; ++r) {
    for (std::uint32_t c = 0; c < grid; ++c) {
      const std::size_t cell = static_cast<std::size_t>(r) * grid + c;
      const double pixels = static_cast<double>(cell_size[r]) * cell_size[c];
      float* out = &data[cell * kHandcraftedDim];
      for (int b = 0; b < 8; ++b) out[b] = static_cast<float>(hist[cell * 8 + b] / pixels);
      out[8] = static_cast<float>(intensity[cell] / pixels - image_mean);
    }
  }
  return FeatureMap(grid, grid, kHandcraftedDim, std::move(data));
}

HandcraftedExtractor::HandcraftedExtractor(std::uint32_t stride) : stride_(stride) {
  require(stride >= 1, ErrorCode::invalid_argument, "stride must be positive");
}

std::string HandcraftedExtractor::fingerprint() const {
  return "handcrafted-grad8+mean/v2/stride=" + std::to_string(stride_);
}

FeatureMap HandcraftedExtractor::extract(const Image& img) const {
  require(img.square(), ErrorCode::invalid_argument, "handcrafted extractor needs a square image");
  require(img.width >= stride_, ErrorCode::invalid_argument, "image smaller than one stride");
  return handcrafted_test_extract(img, img.width / stride_);
}

}  // namespace wmatch
