#pragma once

#include <stdexcept>
#include <string>

namespace rlab {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kDuplicate,
  kSizing,
  kRange,
  kNotFound,
  kIo,
  kPrecondition,
  kMissingCheckpoint,
  kCheckpointFormat,
  kCheckpointVersion,
  kCheckpointDigest,
  kCheckpointTruncated,
  kDivergence,
  kProvenanceLeak,
};

const char* error_code_name(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so
// callers (and the CLI) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rlab
