#include "rlab/util/error.hpp"

namespace rlab {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDuplicate: return "duplicate";
    case ErrorCode::kSizing: return "sizing";
    case ErrorCode::kRange: return "range";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kMissingCheckpoint: return "missing_checkpoint";
    case ErrorCode::kCheckpointFormat: return "checkpoint_format";
    case ErrorCode::kCheckpointVersion: return "checkpoint_version";
    case ErrorCode::kCheckpointDigest: return "checkpoint_digest";
    case ErrorCode::kCheckpointTruncated: return "checkpoint_truncated";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kProvenanceLeak: return "provenance_leak";
  }
  return "unknown";
}

}  // namespace rlab
