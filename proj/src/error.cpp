#include "signdict/error.hpp"

namespace signdict {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse: return "parse";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::unknown_token: return "unknown_token";
    case ErrorCode::empty_catalog: return "empty_catalog";
    case ErrorCode::degenerate_pose: return "degenerate_pose";
    case ErrorCode::fingerprint_mismatch: return "fingerprint_mismatch";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::corrupt_file: return "corrupt_file";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace signdict
