#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "wmatch/feature_map.hpp"

namespace wmatch {

/// FMAP layout (all little-endian): "FMAP", u32 version, u32 height, u32 width,
/// u32 dim, u32 scale_id, u32 orientation_id, then height*width*dim float32
/// values in (row, col, channel) order.
inline constexpr std::uint32_t kFmapVersion = 1;

void write_fmap(std::ostream& out, const FeatureMap& map);
FeatureMap read_fmap(std::istream& in);

void save_fmap(const std::filesystem::path& path, const FeatureMap& map);
FeatureMap load_fmap(const std::filesystem::path& path);

}  // namespace wmatch
