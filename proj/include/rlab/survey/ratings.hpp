#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rlab/survey/packet.hpp"

namespace rlab::survey {

inline constexpr std::string_view kRatingsHeader =
    "rater_id,packet_id,item,slot,credibility,provocativeness";

struct RatingRecord {
  std::string rater_id;
  std::string packet_id;
  std::size_t item = 0;
  char slot = 'A';
  int credibility = 0;      // 1 = artificial .. 5 = highly credible
  int provocativeness = 0;  // 1 = neutral .. 5 = highly provocative

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

// Parses one ratings file; `source` names it in diagnostics.
std::vector<RatingRecord> parse_ratings(std::string_view contents, std::string_view source);

// Files are read in file-name order, then line order. A repeated
// (rater, packet, item, slot) is an error naming both locations.
std::vector<RatingRecord> ingest_ratings(std::vector<std::filesystem::path> files);

std::string serialize_ratings(const std::vector<RatingRecord>& records);

// Exact per-system sums; means and deviations derive from them.
struct SystemStats {
  std::string system;
  std::size_t count = 0;
  long long credibility_sum = 0;
  long long credibility_sq_sum = 0;
  long long provocativeness_sum = 0;
  long long provocativeness_sq_sum = 0;

  double mean_credibility() const;
  double mean_provocativeness() const;
  // Population standard deviation.
  double sd_credibility() const;
  double sd_provocativeness() const;
};

struct SurveySummary {
  std::vector<SystemStats> systems;  // AI-1..AI-4 then HUMAN, when rated
  std::size_t total_ratings = 0;

  const SystemStats* find(std::string_view system) const;
};

// Unblinds every record through the key.
SurveySummary aggregate(const std::vector<RatingRecord>& records, const BlindingKey& key);

// sum / count rounded half-up to two decimals, computed on integers.
std::string mean_2dp(long long sum, std::size_t count);

// "System | Ratings | Credibility | Provocativeness | Credibility SD (pop.) |
// Provocativeness SD (pop.)"
std::string render_summary(const SurveySummary& summary);

}  // namespace rlab::survey
