#include "rlab/survey/ratings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

#include "rlab/util/error.hpp"
#include "rlab/util/io.hpp"
#include "rlab/util/text.hpp"

namespace rlab::survey {

namespace {

int parse_score(const std::string& s, std::string_view column, const std::string& where) {
  if (s.size() != 1 || s[0] < '1' || s[0] > '5') {
    throw Error(ErrorCode::kRange,
                where + ": " + std::string(column) + " must be an integer 1-5, got '" + s + "'");
  }
  return s[0] - '0';
}

double pop_sd(long long sum, long long sq_sum, std::size_t n) {
  if (n == 0) return 0.0;
  const long long nn = static_cast<long long>(n);
  const long long num = nn * sq_sum - sum * sum;  // n^2 * variance
  return std::sqrt(static_cast<double>(num)) / static_cast<double>(n);
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::vector<RatingRecord> parse_ratings(std::string_view contents, std::string_view source) {
  std::vector<std::string> lines = text::split(contents, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines[0] != kRatingsHeader) {
    throw Error(ErrorCode::kParse, std::string(source) + ":1: expected header '" +
                                       std::string(kRatingsHeader) + "'");
  }
  std::vector<RatingRecord> out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string where = std::string(source) + ":" + std::to_string(ln + 1);
    const auto f = text::split(lines[ln], ',');
    if (f.size() != 6) {
      throw Error(ErrorCode::kParse, where + ": expected 6 fields, got " + std::to_string(f.size()));
    }
    RatingRecord r;
    r.rater_id = text::trim(f[0]);
    r.packet_id = text::trim(f[1]);
    if (r.rater_id.empty()) throw Error(ErrorCode::kParse, where + ": empty rater_id");
    const std::string item = text::trim(f[2]);
    if (item.empty() || item.size() > 6 ||
        !std::all_of(item.begin(), item.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
        std::stoul(item) == 0) {
      throw Error(ErrorCode::kRange, where + ": item must be a positive integer, got '" + item + "'");
    }
    r.item = std::stoul(item);
    const std::string slot = text::trim(f[3]);
    // Letters A-E or 1-based indices 1-5.
    if (slot.size() == 1 && slot[0] >= '1' && slot[0] <= '5') {
      r.slot = kSlotLetters[static_cast<std::size_t>(slot[0] - '1')];
    } else if (slot.size() == 1 && std::find(kSlotLetters.begin(), kSlotLetters.end(), slot[0]) !=
                                       kSlotLetters.end()) {
      r.slot = slot[0];
    } else {
      throw Error(ErrorCode::kRange, where + ": slot must be A-E or 1-5, got '" + slot + "'");
    }
    r.credibility = parse_score(text::trim(f[4]), "credibility", where);
    r.provocativeness = parse_score(text::trim(f[5]), "provocativeness", where);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RatingRecord> ingest_ratings(std::vector<std::filesystem::path> files) {
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.filename().string() < b.filename().string();
  });
  std::vector<RatingRecord> all;
  std::map<std::tuple<std::string, std::string, std::size_t, char>, std::string> seen;
  for (const auto& path : files) {
    const std::string name = path.filename().string();
    const std::vector<RatingRecord> recs = parse_ratings(io::read_file(path), name);
    // Line numbers line up with records because blank lines are only trimmed at the end.
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto& r = recs[i];
      const std::string where = name + ":" + std::to_string(i + 2);
      auto [it, fresh] = seen.emplace(std::tuple{r.rater_id, r.packet_id, r.item, r.slot}, where);
      if (!fresh) {
        throw Error(ErrorCode::kDuplicate, where + ": rater " + r.rater_id + " already rated item " +
                                               std::to_string(r.item) + " slot " + r.slot +
                                               " at " + it->second);
      }
      all.push_back(r);
    }
  }
  return all;
}

std::string serialize_ratings(const std::vector<RatingRecord>& records) {
  std::string out(kRatingsHeader);
  out += "\n";
  for (const auto& r : records) {
    out += r.rater_id + "," + r.packet_id + "," + std::to_string(r.item) + "," + r.slot + "," +
           std::to_string(r.credibility) + "," + std::to_string(r.provocativeness) + "\n";
  }
  return out;
}

double SystemStats::mean_credibility() const {
  return count ? static_cast<double>(credibility_sum) / static_cast<double>(count) : 0.0;
}
double SystemStats::mean_provocativeness() const {
  return count ? static_cast<double>(provocativeness_sum) / static_cast<double>(count) : 0.0;
}
double SystemStats::sd_credibility() const {
  return pop_sd(credibility_sum, credibility_sq_sum, count);
}
double SystemStats::sd_provocativeness() const {
  return pop_sd(provocativeness_sum, provocativeness_sq_sum, count);
}

const SystemStats* SurveySummary::find(std::string_view system) const {
  for (const auto& s : systems) {
    if (s.system == system) return &s;
  }
  return nullptr;
}

SurveySummary aggregate(const std::vector<RatingRecord>& records, const BlindingKey& key) {
  std::vector<std::string> order;
  for (harness::ArmId id : harness::kAllArms) order.emplace_back(harness::arm_name(id));
  order.emplace_back(kHumanSystem);
  std::map<std::string, SystemStats> stats;

  SurveySummary summary;
  for (const auto& r : records) {
    if (r.packet_id != key.packet_id) {
      throw Error(ErrorCode::kNotFound, "rating from rater " + r.rater_id + " is for packet " +
                                            r.packet_id + ", key is for " + key.packet_id);
    }
    auto it = key.systems.find({r.item, r.slot});
    if (it == key.systems.end()) {
      throw Error(ErrorCode::kNotFound, "no key entry for item " + std::to_string(r.item) +
                                            " slot " + r.slot);
    }
    SystemStats& s = stats[it->second];
    s.system = it->second;
    ++s.count;
    s.credibility_sum += r.credibility;
    s.credibility_sq_sum += r.credibility * r.credibility;
    s.provocativeness_sum += r.provocativeness;
    s.provocativeness_sq_sum += r.provocativeness * r.provocativeness;
    ++summary.total_ratings;
  }
  for (const std::string& name : order) {
    auto it = stats.find(name);
    if (it != stats.end()) {
      summary.systems.push_back(it->second);
      stats.erase(it);
    }
  }
  for (auto& [name, s] : stats) summary.systems.push_back(s);  // unknown labels last, sorted
  return summary;
}

std::string mean_2dp(long long sum, std::size_t count) {
  if (count == 0) return "n/a";
  const long long n = static_cast<long long>(count);
  const long long hundredths = (200 * sum + n) / (2 * n);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%lld.%02lld", hundredths / 100, hundredths % 100);
  return buf;
}

std::string render_summary(const SurveySummary& summary) {
  std::string out =
      "System | Ratings | Credibility | Provocativeness | Credibility SD (pop.) | "
      "Provocativeness SD (pop.)\n";
  for (const auto& s : summary.systems) {
    out += s.system + " | " + std::to_string(s.count) + " | " +
           mean_2dp(s.credibility_sum, s.count) + " | " +
           mean_2dp(s.provocativeness_sum, s.count) + " | " + fixed2(s.sd_credibility()) + " | " +
           fixed2(s.sd_provocativeness()) + "\n";
  }
  return out;
}

}  // namespace rlab::survey
