#pragma once

#include <stdexcept>
#include <string>

namespace signdict {

enum class ErrorCode {
  parse,
  invalid_argument,
  duplicate_id,
  unknown_token,
  empty_catalog,
  degenerate_pose,
  fingerprint_mismatch,
  version_mismatch,
  corrupt_file,
  not_found,
  conflict,
  io,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; `code()` lets callers (the HTTP
// layer, the CLI) map failures to status codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace signdict
