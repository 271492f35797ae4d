#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rlab/corpus/types.hpp"
#include "rlab/harness/generate.hpp"

namespace rlab::survey {

inline constexpr std::string_view kHumanSystem = "HUMAN";
inline constexpr std::size_t kSlotsPerItem = 5;
inline constexpr std::size_t kDefaultItems = 10;
inline constexpr std::array<char, kSlotsPerItem> kSlotLetters = {'A', 'B', 'C', 'D', 'E'};

struct SurveyItem {
  std::size_t index = 0;  // 1-based position in the packet
  std::string pair_id;
  std::string comment;
  std::array<std::string, kSlotsPerItem> responses;
  std::array<std::string, kSlotsPerItem> systems;  // blinding map, never rater-facing
};

struct SurveyPacket {
  std::string packet_id;
  std::uint64_t shuffle_seed = 0;
  std::vector<SurveyItem> items;
};

// Item selection and slot order come from one seeded Fisher-Yates stream:
// first a shuffle of the test pairs (the first n_items are kept, in shuffled
// order), then one shuffle of the five systems per item.
SurveyPacket build_packet(const std::vector<corpus::CommentReplyPair>& test,
                          const std::vector<harness::GenerationRecord>& records,
                          std::size_t n_items, std::uint64_t seed);

// Rater-facing file. Holds only the packet id, comments and the anonymized
// responses under slot letters A-E; throws kProvenanceLeak if any text would
// reveal a system name.
std::string render_rater_file(const SurveyPacket& packet);
// Separate key mapping (item, slot) to system.
std::string render_key_file(const SurveyPacket& packet);

struct RaterItem {
  std::size_t index = 0;
  std::string comment;
  std::array<std::string, kSlotsPerItem> responses;
};

struct RaterPacket {
  std::string packet_id;
  std::vector<RaterItem> items;
};

RaterPacket parse_rater_file(std::string_view contents);

struct BlindingKey {
  std::string packet_id;
  std::uint64_t shuffle_seed = 0;
  std::map<std::pair<std::size_t, char>, std::string> systems;  // (item, slot) -> system
};

BlindingKey parse_key_file(std::string_view contents);

}  // namespace rlab::survey
