#include "wmatch/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "wmatch/binary_io.hpp"
#include "wmatch/errors.hpp"

namespace wmatch {

Image load_image(const std::filesystem::path& path) {
  require(std::filesystem::exists(path), ErrorCode::io, "image not found: " + path.string());
  cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  require(!raw.empty(), ErrorCode::io, "cannot decode image: " + path.string());
  require(raw.depth() == CV_8U, ErrorCode::unsupported, "only 8-bit images are supported: " + path.string());

  const int in_channels = raw.channels();
  require(in_channels == 1 || in_channels == 3 || in_channels == 4, ErrorCode::unsupported,
          "unsupported channel count in " + path.string());
  const std::uint32_t channels = in_channels == 1 ? 1 : 3;
  Image img(static_cast<std::uint32_t>(raw.cols), static_cast<std::uint32_t>(raw.rows), channels);
  img.provenance = path.string();
  for (int y = 0; y < raw.rows; ++y) {
    const auto* row = raw.ptr<std::uint8_t>(y);
    for (int x = 0; x < raw.cols; ++x) {
      const std::uint8_t* px = row + static_cast<std::ptrdiff_t>(x) * in_channels;
      float* dst = &img.pixels[(static_cast<std::size_t>(y) * raw.cols + x) * channels];
      if (channels == 1) {
        dst[0] = px[0] / 255.0f;
      } else {
        // OpenCV decodes to BGR(A)
        dst[0] = px[2] / 255.0f;
        dst[1] = px[1] / 255.0f;
        dst[2] = px[0] / 255.0f;
      }
    }
  }
  return img;
}

void save_png(const std::filesystem::path& path, const Image& img) {
  require(img.channels == 1 || img.channels == 3, ErrorCode::unsupported, "PNG export needs 1 or 3 channels");
  const int type = img.channels == 1 ? CV_8UC1 : CV_8UC3;
  cv::Mat mat(static_cast<int>(img.height), static_cast<int>(img.width), type);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    auto* row = mat.ptr<std::uint8_t>(static_cast<int>(y));
    for (std::uint32_t x = 0; x < img.width; ++x) {
      for (std::uint32_t c = 0; c < img.channels; ++c) {
        const float v = std::clamp(img.at(x, y, c), 0.0f, 1.0f);
        const std::uint32_t out_c = img.channels == 3 ? 2 - c : c;
        row[x * img.channels + out_c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
    }
  }

  std::vector<std::uint8_t> encoded;
  require(cv::imencode(".png", mat, encoded), ErrorCode::io, "PNG encoding failed for " + path.string());
  io::write_file_atomically(path, [&](std::ostream& out) {
    out.write(reinterpret_cast<const char*>(encoded.data()), static_cast<std::streamsize>(encoded.size()));
  });
}

}  // namespace wmatch
