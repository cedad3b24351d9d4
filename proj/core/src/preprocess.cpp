#include "wmatch/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wmatch/errors.hpp"

namespace wmatch {

Image preprocess(const Image& raw, std::optional<Rect> guide, const PreprocessConfig& cfg) {
  require(raw.width > 0 && raw.height > 0, ErrorCode::invalid_argument, "preprocess of empty image");
  const Rect rect = guide.value_or(Rect{0.0, 0.0, static_cast<double>(raw.width), static_cast<double>(raw.height)});
  require(rect.width > 0.0 && rect.height > 0.0, ErrorCode::invalid_argument, "degenerate guide rectangle");
  require(rect.x >= 0.0 && rect.y >= 0.0 && rect.x + rect.width <= raw.width + 1e-9 &&
              rect.y + rect.height <= raw.height + 1e-9,
          ErrorCode::invalid_argument, "guide rectangle outside the image");

  const double sx = cfg.guide_side / rect.width;
  const double sy = cfg.guide_side / rect.height;
  const auto resized_w = static_cast<std::int64_t>(std::llround(raw.width * sx));
  const auto resized_h = static_cast<std::int64_t>(std::llround(raw.height * sy));
  const double cx = (rect.x + rect.width / 2.0) * sx;
  const double cy = (rect.y + rect.height / 2.0) * sy;
  const auto x0 = static_cast<std::int64_t>(std::floor(cx - cfg.crop_side / 2.0 + 0.5));
  const auto y0 = static_cast<std::int64_t>(std::floor(cy - cfg.crop_side / 2.0 + 0.5));

  // Sampling positions of the virtual rescaled image, back-projected to raw.
  const double step_x = static_cast<double>(raw.width) / resized_w;
  const double step_y = static_cast<double>(raw.height) / resized_h;
  const auto means = channel_means(raw);

  Image out(cfg.crop_side, cfg.crop_side, raw.channels);
  for (std::uint32_t oy = 0; oy < cfg.crop_side; ++oy) {
    const std::int64_t ry = y0 + oy;
    const bool row_inside = ry >= 0 && ry < resized_h;
    double fy = std::clamp((ry + 0.5) * step_y - 0.5, 0.0, static_cast<double>(raw.height - 1));
    const auto iy0 = static_cast<std::uint32_t>(std::floor(fy));
    const std::uint32_t iy1 = std::min(iy0 + 1, raw.height - 1);
    const auto wy = static_cast<float>(fy - iy0);
    for (std::uint32_t ox = 0; ox < cfg.crop_side; ++ox) {
      const std::int64_t rx = x0 + ox;
      if (!row_inside || rx < 0 || rx >= resized_w) {
        for (std::uint32_t c = 0; c < raw.channels; ++c) out.at(ox, oy, c) = static_cast<float>(means[c]);
        continue;
      }
      double fx = std::clamp((rx + 0.5) * step_x - 0.5, 0.0, static_cast<double>(raw.width - 1));
      const auto ix0 = static_cast<std::uint32_t>(std::floor(fx));
      const std::uint32_t ix1 = std::min(ix0 + 1, raw.width - 1);
      const auto wx = static_cast<float>(fx - ix0);
      for (std::uint32_t c = 0; c < raw.channels; ++c) {
        const float a = raw.at(ix0, iy0, c);
        const float b = raw.at(ix1, iy0, c);
        const float d = raw.at(ix0, iy1, c);
        const float e = raw.at(ix1, iy1, c);
        const float top = a + (b - a) * wx;
        const float bottom = d + (e - d) * wx;
        out.at(ox, oy, c) = top + (bottom - top) * wy;
      }
    }
  }
  std::ostringstream prov;
  prov << raw.provenance << "|guide(" << rect.x << "," << rect.y << "," << rect.width << "," << rect.height
       << ")->" << cfg.guide_side << "/crop" << cfg.crop_side;
  out.provenance = prov.str();
  return out;
}

Image orient_image(const Image& img, OrientationId orientation) {
  require(img.square(), ErrorCode::invalid_argument, "orient_image needs a square image");
  if (orientation.id() == 0) return img;
  const std::uint32_t n = img.width;
  const std::uint32_t last = n - 1;
  Image out(n, n, img.channels);
  out.provenance = img.provenance + "|orient" + std::to_string(orientation.id());
  for (std::uint32_t y = 0; y < n; ++y) {
    for (std::uint32_t x = 0; x < n; ++x) {
      // Map the destination pixel back through the rotation, then the flip.
      std::uint32_t sx = x;
      std::uint32_t sy = y;
      switch (orientation.rotation()) {
        case 1: sx = last - y; sy = x; break;
        case 2: sx = last - x; sy = last - y; break;
        case 3: sx = y; sy = last - x; break;
        default: break;
      }
      if (orientation.flipped()) sx = last - sx;
      for (std::uint32_t c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(sx, sy, c);
    }
  }
  return out;
}

}  // namespace wmatch
