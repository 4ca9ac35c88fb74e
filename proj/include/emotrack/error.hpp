#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emotrack {

enum class ErrorCode {
  kInvalidArgument,
  kUnknownKind,
  kInvalidRating,
  kUnknownCard,
  kNotFound,
  kUpstream,
  kProviderUnavailable,
  kStorage,
  kIo,
  kMalformed,
  kConfig,
};

std::string_view error_code_name(ErrorCode code);

// Base error type for every module. Carries a machine-readable code so the
// HTTP layer and CLI can map it to a status / exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace emotrack
