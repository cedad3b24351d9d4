#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wmatch {

/// Coarse classification of failures. The CLI maps each code to a distinct
/// exit status and diagnostic tag.
enum class ErrorCode {
  invalid_argument,
  shape_mismatch,
  non_finite,
  io,
  format,
  fingerprint_mismatch,
  unsupported,
  precondition,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace wmatch
