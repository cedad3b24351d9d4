#pragma once

// Little-endian primitive encoding shared by the FMAP, ADPT, TRIP and index
// file formats.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace wmatch::io {

void write_magic(std::ostream& out, std::string_view magic);
void write_u32(std::ostream& out, std::uint32_t value);
void write_u64(std::ostream& out, std::uint64_t value);
void write_f32(std::ostream& out, float value);
void write_f32_array(std::ostream& out, std::span<const float> values);
void write_string(std::ostream& out, std::string_view value);

/// Throws Error(format) when the next four bytes are not `magic`.
void expect_magic(std::istream& in, std::string_view magic, std::string_view what);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);
void read_f32_array(std::istream& in, std::span<float> out);
std::string read_string(std::istream& in, std::uint32_t max_length = 1u << 20);

/// Writes to a sibling temporary file and renames it over `path` once the
/// writer returns, so readers never observe a partially written file.
template <typename Writer>
void write_file_atomically(const std::filesystem::path& path, Writer&& writer);

void commit_temporary(const std::filesystem::path& tmp, const std::filesystem::path& path);
std::filesystem::path temporary_sibling(const std::filesystem::path& path);

}  // namespace wmatch::io

#include <fstream>

#include "wmatch/errors.hpp"

namespace wmatch::io {

template <typename Writer>
void write_file_atomically(const std::filesystem::path& path, Writer&& writer) {
  const auto tmp = temporary_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io, "cannot open " + tmp.string() + " for writing");
    try {
      writer(out);
    } catch (...) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw;
    }
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      fail(ErrorCode::io, "write failed for " + path.string());
    }
  }
  commit_temporary(tmp, path);
}

}  // namespace wmatch::io
