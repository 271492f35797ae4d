#include "rlab/survey/packet.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "rlab/util/error.hpp"
#include "rlab/util/hash.hpp"
#include "rlab/util/rng.hpp"
#include "rlab/util/text.hpp"

namespace rlab::survey {

namespace {

constexpr std::string_view kRaterMagic = "#rlab-survey-packet v1";
constexpr std::string_view kKeyMagic = "#rlab-survey-key v1";

std::vector<std::string> provenance_markers() {
  std::vector<std::string> out;
  for (harness::ArmId id : harness::kAllArms) out.emplace_back(harness::arm_name(id));
  out.emplace_back(kHumanSystem);
  return out;
}

void check_blind(std::string_view text, std::size_t item) {
  for (const std::string& marker : provenance_markers()) {
    if (text.find(marker) != std::string_view::npos) {
      throw Error(ErrorCode::kProvenanceLeak,
                  "item " + std::to_string(item) + " text contains provenance marker '" +
                      marker + "'");
    }
  }
}

std::size_t parse_index(std::string_view s, std::string_view what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::kParse, std::string(what) + ": bad number '" + std::string(s) + "'");
  }
  return static_cast<std::size_t>(std::stoull(std::string(s)));
}

int slot_position(char letter) {
  for (std::size_t i = 0; i < kSlotLetters.size(); ++i) {
    if (kSlotLetters[i] == letter) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

SurveyPacket build_packet(const std::vector<corpus::CommentReplyPair>& test,
                          const std::vector<harness::GenerationRecord>& records,
                          std::size_t n_items, std::uint64_t seed) {
  if (n_items == 0) throw Error(ErrorCode::kInvalidArgument, "survey needs at least one item");
  if (test.size() < n_items) {
    throw Error(ErrorCode::kSizing, "survey wants " + std::to_string(n_items) +
                                        " items but the test split has " +
                                        std::to_string(test.size()));
  }

  std::map<std::pair<std::string, std::string>, const harness::GenerationRecord*> by_key;
  for (const auto& r : records) by_key[{r.pair_id, r.arm_id}] = &r;

  std::vector<std::size_t> order(test.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  fisher_yates(std::span<std::size_t>(order), rng);

  SurveyPacket packet;
  packet.shuffle_seed = seed;
  Fnv64 id_hash;
  id_hash.update_u64(seed);

  for (std::size_t k = 0; k < n_items; ++k) {
    const corpus::CommentReplyPair& pair = test[order[k]];
    SurveyItem item;
    item.index = k + 1;
    item.pair_id = pair.pair_id;
    item.comment = pair.source;
    id_hash.update(pair.pair_id).update("\n");

    std::array<std::pair<std::string, std::string>, kSlotsPerItem> entries;
    for (std::size_t a = 0; a < harness::kAllArms.size(); ++a) {
      const std::string arm(harness::arm_name(harness::kAllArms[a]));
      auto it = by_key.find({pair.pair_id, arm});
      if (it == by_key.end()) {
        throw Error(ErrorCode::kNotFound,
                    "pair " + pair.pair_id + " has no response from " + arm);
      }
      entries[a] = {arm, it->second->response_text};
    }
    entries[kSlotsPerItem - 1] = {std::string(kHumanSystem), pair.target};
    fisher_yates(std::span<std::pair<std::string, std::string>>(entries), rng);
    for (std::size_t s = 0; s < kSlotsPerItem; ++s) {
      item.systems[s] = entries[s].first;
      item.responses[s] = entries[s].second;
    }
    packet.items.push_back(std::move(item));
  }
  packet.packet_id = "pkt-" + hex64(id_hash.value()).substr(0, 12);
  return packet;
}

std::string render_rater_file(const SurveyPacket& packet) {
  std::string out;
  out += kRaterMagic;
  out += "\npacket_id\t" + packet.packet_id + "\n";
  out += "items\t" + std::to_string(packet.items.size()) + "\n";
  for (const SurveyItem& item : packet.items) {
    check_blind(item.comment, item.index);
    out += "item\t" + std::to_string(item.index) + "\t" + text::escape_field(item.comment) + "\n";
    for (std::size_t s = 0; s < kSlotsPerItem; ++s) {
      check_blind(item.responses[s], item.index);
      out += kSlotLetters[s];
      out += "\t" + text::escape_field(item.responses[s]) + "\n";
    }
  }
  return out;
}

std::string render_key_file(const SurveyPacket& packet) {
  std::string out;
  out += kKeyMagic;
  out += "\npacket_id\t" + packet.packet_id + "\n";
  out += "shuffle_seed\t" + std::to_string(packet.shuffle_seed) + "\n";
  out += "item\tslot\tpair_id\tsystem\n";
  for (const SurveyItem& item : packet.items) {
    for (std::size_t s = 0; s < kSlotsPerItem; ++s) {
      out += std::to_string(item.index) + "\t" + kSlotLetters[s] + "\t" + item.pair_id + "\t" +
             item.systems[s] + "\n";
    }
  }
  return out;
}

RaterPacket parse_rater_file(std::string_view contents) {
  const std::vector<std::string> lines = text::split(contents, '\n');
  if (lines.empty() || lines[0] != kRaterMagic) {
    throw Error(ErrorCode::kParse, "rater file: missing header line");
  }
  RaterPacket packet;
  std::size_t declared = 0;
  bool have_count = false;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty()) continue;
    const std::string where = "rater file line " + std::to_string(ln + 1);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::kParse, where + ": missing tab");
    const std::string tag = line.substr(0, tab);
    const std::string rest = line.substr(tab + 1);
    if (tag == "packet_id") {
      packet.packet_id = rest;
    } else if (tag == "items") {
      declared = parse_index(rest, where);
      have_count = true;
    } else if (tag == "item") {
      const auto tab2 = rest.find('\t');
      if (tab2 == std::string::npos) throw Error(ErrorCode::kParse, where + ": item needs text");
      RaterItem item;
      item.index = parse_index(rest.substr(0, tab2), where);
      item.comment = text::unescape_field(rest.substr(tab2 + 1));
      packet.items.push_back(std::move(item));
    } else if (tag.size() == 1 && slot_position(tag[0]) >= 0) {
      if (packet.items.empty()) throw Error(ErrorCode::kParse, where + ": slot before any item");
      packet.items.back().responses[static_cast<std::size_t>(slot_position(tag[0]))] =
          text::unescape_field(rest);
    } else {
      throw Error(ErrorCode::kParse, where + ": unknown tag '" + tag + "'");
    }
  }
  if (!have_count || declared != packet.items.size()) {
    throw Error(ErrorCode::kParse, "rater file: item count does not match");
  }
  return packet;
}

BlindingKey parse_key_file(std::string_view contents) {
  const std::vector<std::string> lines = text::split(contents, '\n');
  if (lines.size() < 4 || lines[0] != kKeyMagic) {
    throw Error(ErrorCode::kParse, "key file: missing header");
  }
  BlindingKey key;
  auto field = [&](std::size_t ln, std::string_view name) {
    const auto parts = text::split(lines[ln], '\t');
    if (parts.size() != 2 || parts[0] != name) {
      throw Error(ErrorCode::kParse, "key file line " + std::to_string(ln + 1) + ": expected " +
                                         std::string(name));
    }
    return parts[1];
  };
  key.packet_id = field(1, "packet_id");
  key.shuffle_seed = std::stoull(field(2, "shuffle_seed"));
  for (std::size_t ln = 4; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const std::string where = "key file line " + std::to_string(ln + 1);
    const auto parts = text::split(lines[ln], '\t');
    if (parts.size() != 4 || parts[1].size() != 1 || slot_position(parts[1][0]) < 0) {
      throw Error(ErrorCode::kParse, where + ": malformed row");
    }
    key.systems[{parse_index(parts[0], where), parts[1][0]}] = parts[3];
  }
  return key;
}

}  // namespace rlab::survey
