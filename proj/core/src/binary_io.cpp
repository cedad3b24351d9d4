#include "wmatch/binary_io.hpp"

#include <array>
#include <bit>
#include <istream>
#include <ostream>
#include <random>

namespace wmatch {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::io: return "io";
    case ErrorCode::format: return "format";
    case ErrorCode::fingerprint_mismatch: return "fingerprint_mismatch";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::precondition: return "precondition";
  }
  return "unknown";
}

}  // namespace wmatch

namespace wmatch::io {
namespace {

template <std::size_t N>
void put_le(std::ostream& out, std::uint64_t value) {
  std::array<char, N> bytes{};
  for (std::size_t i = 0; i < N; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), N);
}

template <std::size_t N>
std::uint64_t get_le(std::istream& in) {
  std::array<unsigned char, N> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), N);
  require(in.gcount() == static_cast<std::streamsize>(N), ErrorCode::format, "unexpected end of file");
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < N; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

void write_u32(std::ostream& out, std::uint32_t value) { put_le<4>(out, value); }
void write_u64(std::ostream& out, std::uint64_t value) { put_le<8>(out, value); }
void write_f32(std::ostream& out, float value) { put_le<4>(out, std::bit_cast<std::uint32_t>(value)); }

void write_f32_array(std::ostream& out, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (float v : values) write_f32(out, v);
  }
}

void write_string(std::ostream& out, std::string_view value) {
  write_u32(out, static_cast<std::uint32_t>(value.size()));
  out.write(value.data(), static_cast<std::streamsize>(value.size()));
}

void expect_magic(std::istream& in, std::string_view magic, std::string_view what) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || got != magic) {
    fail(ErrorCode::format, std::string(what) + ": bad magic, expected \"" + std::string(magic) + "\"");
  }
}

std::uint32_t read_u32(std::istream& in) { return static_cast<std::uint32_t>(get_le<4>(in)); }
std::uint64_t read_u64(std::istream& in) { return get_le<8>(in); }
float read_f32(std::istream& in) { return std::bit_cast<float>(static_cast<std::uint32_t>(get_le<4>(in))); }

void read_f32_array(std::istream& in, std::span<float> out) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size_bytes()));
    require(in.gcount() == static_cast<std::streamsize>(out.size_bytes()), ErrorCode::format,
            "unexpected end of file in float payload");
  } else {
    for (float& v : out) v = read_f32(in);
  }
}

std::string read_string(std::istream& in, std::uint32_t max_length) {
  const auto n = read_u32(in);
  require(n <= max_length, ErrorCode::format, "string length " + std::to_string(n) + " exceeds limit");
  std::string s(n, '\0');
  in.read(s.data(), n);
  require(in.gcount() == static_cast<std::streamsize>(n), ErrorCode::format, "unexpected end of file in string");
  return s;
}

std::filesystem::path temporary_sibling(const std::filesystem::path& path) {
  std::random_device rd;
  auto tmp = path;
  tmp += ".tmp" + std::to_string(rd() % 1000000);
  return tmp;
}

void commit_temporary(const std::filesystem::path& tmp, const std::filesystem::path& path) {
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::io, "cannot move temporary file into place: " + path.string());
  }
}

}  // namespace wmatch::io
