#include "plot.hpp"

#include <algorithm>
#include <cmath>

namespace wmatch::cli {
namespace {

void put(Image& img, int x, int y, float r, float g, float b) {
  if (x < 0 || y < 0 || x >= static_cast<int>(img.width) || y >= static_cast<int>(img.height)) return;
  img.at(x, y, 0) = r;
  img.at(x, y, 1) = g;
  img.at(x, y, 2) = b;
}

void line(Image& img, double x0, double y0, double x1, double y1, float r, float g, float b) {
  const int steps = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
    const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
    put(img, x, y, r, g, b);
    put(img, x, y + 1, r, g, b);
  }
}

}  // namespace

Image plot_curve(const std::vector<double>& curve, std::uint32_t width, std::uint32_t height) {
  Image img(width, height, 3, 1.0f);
  const double left = 40, right = width - 20.0, top = 20, bottom = height - 30.0;
  line(img, left, bottom, right, bottom, 0, 0, 0);
  line(img, left, top, left, bottom, 0, 0, 0);
  for (int tick = 1; tick <= 4; ++tick) {  // gridlines at 25% steps
    const double y = bottom - (bottom - top) * tick / 4.0;
    line(img, left, y, right, y, 0.85f, 0.85f, 0.85f);
  }
  if (curve.empty()) return img;
  auto px = [&](std::size_t k) {
    return curve.size() == 1 ? left : left + (right - left) * static_cast<double>(k) / (curve.size() - 1);
  };
  auto py = [&](double acc) { return bottom - (bottom - top) * std::clamp(acc, 0.0, 1.0); };
  for (std::size_t k = 1; k < curve.size(); ++k) {
    line(img, px(k - 1), py(curve[k - 1]), px(k), py(curve[k]), 0.8f, 0.1f, 0.1f);
  }
  return img;
}

}  // namespace wmatch::cli
