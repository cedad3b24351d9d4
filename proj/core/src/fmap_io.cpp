#include "wmatch/fmap_io.hpp"

#include <fstream>
#include <limits>

#include "wmatch/binary_io.hpp"
#include "wmatch/errors.hpp"

namespace wmatch {
namespace {
constexpr std::uint64_t kMaxElements = 1ull << 31;
}

void write_fmap(std::ostream& out, const FeatureMap& map) {
  io::write_magic(out, "FMAP");
  io::write_u32(out, kFmapVersion);
  io::write_u32(out, map.height());
  io::write_u32(out, map.width());
  io::write_u32(out, map.dim());
  io::write_u32(out, map.scale_id());
  io::write_u32(out, map.orientation().id());
  io::write_f32_array(out, map.data());
}

FeatureMap read_fmap(std::istream& in) {
  io::expect_magic(in, "FMAP", "feature map");
  const auto version = io::read_u32(in);
  require(version == kFmapVersion, ErrorCode::format, "unsupported FMAP version " + std::to_string(version));
  const auto height = io::read_u32(in);
  const auto width = io::read_u32(in);
  const auto dim = io::read_u32(in);
  const auto scale_id = io::read_u32(in);
  const auto orientation = io::read_u32(in);
  require(height > 0 && width > 0 && dim > 0, ErrorCode::format, "FMAP with empty extent");
  const std::uint64_t n = static_cast<std::uint64_t>(height) * width * dim;
  require(n < kMaxElements, ErrorCode::format, "FMAP extent too large");
  require(orientation < OrientationId::kCount, ErrorCode::format, "FMAP orientation id out of range");
  std::vector<float> data(n);
  io::read_f32_array(in, data);
  return FeatureMap(height, width, dim, std::move(data), scale_id, OrientationId(orientation));
}

void save_fmap(const std::filesystem::path& path, const FeatureMap& map) {
  io::write_file_atomically(path, [&](std::ostream& out) { write_fmap(out, map); });
}

FeatureMap load_fmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path.string());
  return read_fmap(in);
}

}  // namespace wmatch
