#include "emotrack/error.hpp"

namespace emotrack {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kUnknownKind: return "unknown_kind";
    case ErrorCode::kInvalidRating: return "invalid_rating";
    case ErrorCode::kUnknownCard: return "unknown_card";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kUpstream: return "upstream_error";
    case ErrorCode::kProviderUnavailable: return "provider_unavailable";
    case ErrorCode::kStorage: return "storage_failure";
    case ErrorCode::kIo: return "io_failure";
    case ErrorCode::kMalformed: return "malformed";
    case ErrorCode::kConfig: return "config_error";
  }
  return "unknown";
}

}  // namespace emotrack
