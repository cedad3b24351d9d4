#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "wmatch/triplet.hpp"

namespace wmatch {

/// TRIP layout (little-endian): "TRIP", u32 version, u32 dim, u32 count, then
/// count*dim float32 anchors, positives and negatives, u32 provenance flag and
/// (if set) count * 3 * (image, scale, row, col) u32 records, then u32 image
/// count and length-prefixed UTF-8 image references.
inline constexpr std::uint32_t kTripVersion = 1;

void write_triplets(std::ostream& out, const TripletBatch& batch);
TripletBatch read_triplets(std::istream& in);
void save_triplets(const std::filesystem::path& path, const TripletBatch& batch);
TripletBatch load_triplets(const std::filesystem::path& path);

}  // namespace wmatch
