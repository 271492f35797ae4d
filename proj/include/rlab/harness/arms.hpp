#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace rlab::harness {

enum class ArmId { kAi1, kAi2, kAi3, kAi4 };

inline constexpr std::array<ArmId, 4> kAllArms = {ArmId::kAi1, ArmId::kAi2, ArmId::kAi3, ArmId::kAi4};

struct SamplingConfig {
  double temperature = 0.9;
  std::size_t top_k = 40;
  std::size_t max_new_tokens = 128;
  std::uint64_t seed = 0;
  bool greedy = false;  // argmax decoding; temperature and seed are ignored

  void validate() const;
};

struct ArmConfig {
  ArmId id = ArmId::kAi1;
  bool fine_tuned = false;
  bool prompted = false;
  SamplingConfig sampling;
};

// AI-1 raw/unprompted, AI-2 raw/prompted, AI-3 tuned/unprompted,
// AI-4 tuned/prompted.
ArmConfig arm_config(ArmId id, const SamplingConfig& sampling = {});

std::string_view arm_name(ArmId id);   // "AI-1"
std::string_view arm_label(ArmId id);  // "AI-1 (Raw Unprompted)"
ArmId parse_arm(std::string_view name);

}  // namespace rlab::harness
