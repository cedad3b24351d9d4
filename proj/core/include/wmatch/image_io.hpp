#pragma once

#include <filesystem>

#include "wmatch/image.hpp"

namespace wmatch {

/// Decodes an 8-bit PNG or JPEG into [0, 1] floats. Gray images stay single
/// channel, color images become RGB, alpha is dropped.
Image load_image(const std::filesystem::path& path);

/// Encodes as 8-bit PNG (values clamped, rounded to nearest). The write is
/// atomic: the target either keeps its old content or gets the full image.
void save_png(const std::filesystem::path& path, const Image& img);

}  // namespace wmatch
