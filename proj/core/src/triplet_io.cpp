#include "wmatch/triplet_io.hpp"

#include <fstream>

#include "wmatch/binary_io.hpp"
#include "wmatch/errors.hpp"

namespace wmatch {
namespace {

void write_ref(std::ostream& out, const TripletElementRef& r) {
  io::write_u32(out, r.image);
  io::write_u32(out, r.scale);
  io::write_u32(out, r.row);
  io::write_u32(out, r.col);
}

TripletElementRef read_ref(std::istream& in) {
  TripletElementRef r;
  r.image = io::read_u32(in);
  r.scale = io::read_u32(in);
  r.row = io::read_u32(in);
  r.col = io::read_u32(in);
  return r;
}

}  // namespace

void write_triplets(std::ostream& out, const TripletBatch& batch) {
  batch.validate();
  io::write_magic(out, "TRIP");
  io::write_u32(out, kTripVersion);
  io::write_u32(out, batch.dim);
  io::write_u32(out, static_cast<std::uint32_t>(batch.size()));
  io::write_f32_array(out, batch.anchors);
  io::write_f32_array(out, batch.positives);
  io::write_f32_array(out, batch.negatives);
  io::write_u32(out, batch.provenance.empty() ? 0 : 1);
  for (const auto& p : batch.provenance) {
    write_ref(out, p.anchor);
    write_ref(out, p.positive);
    write_ref(out, p.negative);
  }
  io::write_u32(out, static_cast<std::uint32_t>(batch.images.size()));
  for (const auto& s : batch.images) io::write_string(out, s);
}

TripletBatch read_triplets(std::istream& in) {
  io::expect_magic(in, "TRIP", "triplet batch");
  const auto version = io::read_u32(in);
  require(version == kTripVersion, ErrorCode::format, "unsupported TRIP version " + std::to_string(version));
  TripletBatch b;
  b.dim = io::read_u32(in);
  const auto count = io::read_u32(in);
  require(b.dim > 0, ErrorCode::format, "TRIP with zero dim");
  const std::uint64_t n = static_cast<std::uint64_t>(count) * b.dim;
  require(n < (1ull << 30), ErrorCode::format, "TRIP too large");
  b.anchors.resize(n);
  b.positives.resize(n);
  b.negatives.resize(n);
  io::read_f32_array(in, b.anchors);
  io::read_f32_array(in, b.positives);
  io::read_f32_array(in, b.negatives);
  const auto has_prov = io::read_u32(in);
  require(has_prov <= 1, ErrorCode::format, "TRIP provenance flag must be 0 or 1");
  if (has_prov) {
    b.provenance.resize(count);
    for (auto& p : b.provenance) {
      p.anchor = read_ref(in);
      p.positive = read_ref(in);
      p.negative = read_ref(in);
    }
  }
  const auto images = io::read_u32(in);
  require(images < (1u << 24), ErrorCode::format, "TRIP image table too large");
  b.images.resize(images);
  for (auto& s : b.images) s = io::read_string(in);
  return b;
}

void save_triplets(const std::filesystem::path& path, const TripletBatch& batch) {
  io::write_file_atomically(path, [&](std::ostream& out) { write_triplets(out, batch); });
}

TripletBatch load_triplets(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path.string());
  return read_triplets(in);
}

}  // namespace wmatch
