#pragma once

#include <vector>

#include "wmatch/image.hpp"

namespace wmatch::cli {

/// Accuracy@K line plot (K = 1..n on x, [0, 1] on y), RGB, white background.
Image plot_curve(const std::vector<double>& curve, std::uint32_t width = 480, std::uint32_t height = 320);

}  // namespace wmatch::cli
