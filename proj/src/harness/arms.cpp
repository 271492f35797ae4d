#include "rlab/harness/arms.hpp"

#include "rlab/util/error.hpp"

namespace rlab::harness {

void SamplingConfig::validate() const {
  if (!greedy && !(temperature > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be > 0 (use greedy for argmax)");
  }
  if (top_k < 1) throw Error(ErrorCode::kInvalidArgument, "top_k must be >= 1");
  if (max_new_tokens < 1) throw Error(ErrorCode::kInvalidArgument, "max_new_tokens must be >= 1");
}

ArmConfig arm_config(ArmId id, const SamplingConfig& sampling) {
  ArmConfig arm;
  arm.id = id;
  arm.fine_tuned = id == ArmId::kAi3 || id == ArmId::kAi4;
  arm.prompted = id == ArmId::kAi2 || id == ArmId::kAi4;
  arm.sampling = sampling;
  return arm;
}

std::string_view arm_name(ArmId id) {
  switch (id) {
    case ArmId::kAi1: return "AI-1";
    case ArmId::kAi2: return "AI-2";
    case ArmId::kAi3: return "AI-3";
    case ArmId::kAi4: return "AI-4";
  }
  return "?";
}

std::string_view arm_label(ArmId id) {
  switch (id) {
    case ArmId::kAi1: return "AI-1 (Raw Unprompted)";
    case ArmId::kAi2: return "AI-2 (Raw Prompted)";
    case ArmId::kAi3: return "AI-3 (Fine-Tuned Unprompted)";
    case ArmId::kAi4: return "AI-4 (Fine-Tuned Prompted)";
  }
  return "?";
}

ArmId parse_arm(std::string_view name) {
  for (ArmId id : kAllArms) {
    if (arm_name(id) == name) return id;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown arm '" + std::string(name) + "' (expected AI-1..AI-4)");
}

}  // namespace rlab::harness
