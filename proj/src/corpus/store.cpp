#include "rlab/corpus/store.hpp"

#include <map>

#include "json.hpp"
#include "rlab/util/error.hpp"
#include "rlab/util/io.hpp"
#include "rlab/util/text.hpp"

namespace rlab::corpus {

namespace {
constexpr std::string_view kPairsHeader =
    "pair_id\tcommunity\tpost_title\tsource_author\ttarget_author\tsource\ttarget";
}

std::string serialize_pairs(const std::vector<CommentReplyPair>& pairs) {
  std::string out(kPairsHeader);
  out.push_back('\n');
  for (const auto& p : pairs) {
    for (const std::string* field : {&p.pair_id, &p.community, &p.post_title, &p.source_author,
                                     &p.target_author, &p.source}) {
      out += text::escape_field(*field);
      out.push_back('\t');
    }
    out += text::escape_field(p.target);
    out.push_back('\n');
  }
  return out;
}

std::vector<CommentReplyPair> parse_pairs(std::string_view contents) {
  std::vector<CommentReplyPair> pairs;
  const auto lines = text::split(contents, '\n');
  if (lines.empty() || lines.front() != kPairsHeader) {
    throw Error(ErrorCode::kParse, "pairs file: missing or wrong header line");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = text::split(lines[i], '\t');
    if (f.size() != 7) {
      throw Error(ErrorCode::kParse, "pairs file line " + std::to_string(i + 1) + ": expected 7 fields, got " +
                                         std::to_string(f.size()));
    }
    pairs.push_back(CommentReplyPair{text::unescape_field(f[0]), text::unescape_field(f[5]),
                                     text::unescape_field(f[6]), text::unescape_field(f[1]),
                                     text::unescape_field(f[2]), text::unescape_field(f[3]),
                                     text::unescape_field(f[4])});
  }
  return pairs;
}

std::vector<CommentReplyPair> load_pairs(const std::filesystem::path& path) {
  return parse_pairs(io::read_file(path));
}

std::string serialize_drop_log(const std::vector<Drop>& drops) {
  std::string out = "pair_id\treason\n";
  for (const auto& d : drops) {
    out += text::escape_field(d.pair_id);
    out.push_back('\t');
    out += drop_reason_name(d.reason);
    out.push_back('\n');
  }
  return out;
}

CorpusManifest build_manifest(const std::vector<ThreadNode>& nodes, const Extraction& extraction,
                              const FilterResult& filtered, const FilterConfig& cfg,
                              std::uint64_t seed, const Split& split) {
  std::map<std::string, CommunityCount> by_name;
  for (const auto& n : nodes) {
    if (n.is_root()) {
      auto& c = by_name[n.community];
      c.name = n.community;
      ++c.post_count;
    }
  }
  for (const auto& p : filtered.retained) {
    auto& c = by_name[p.community];
    c.name = p.community;
    ++c.pair_count;
  }
  CorpusManifest m;
  for (auto& [name, c] : by_name) m.communities.push_back(c);
  m.filter_config = cfg;
  m.split_seed = seed;
  m.train_size = split.train.size();
  m.validation_size = split.validation.size();
  m.test_size = split.test.size();
  m.extract_stats = extraction.stats;
  m.extracted_pairs = extraction.pairs.size();
  m.dropped_pairs = filtered.drop_log.size();
  return m;
}

std::string serialize_manifest(const CorpusManifest& m) {
  using nlohmann::json;
  json communities = json::array();
  for (const auto& c : m.communities) {
    communities.push_back({{"name", c.name}, {"post_count", c.post_count}, {"pair_count", c.pair_count}});
  }
  json doc = {
      {"communities", communities},
      {"filter_config",
       {{"min_chars", m.filter_config.min_chars},
        {"min_tokens", m.filter_config.min_tokens},
        {"strip_urls", m.filter_config.strip_urls},
        {"drop_moderation_artifacts", m.filter_config.drop_moderation_artifacts},
        {"dedup", m.filter_config.dedup},
        {"blocked_authors", m.filter_config.blocked_authors}}},
      {"split_seed", m.split_seed},
      {"split_sizes", {{"train", m.train_size}, {"validation", m.validation_size}, {"test", m.test_size}}},
      {"extraction",
       {{"roots", m.extract_stats.roots},
        {"unreachable_nodes", m.extract_stats.unreachable_nodes},
        {"empty_root_edges", m.extract_stats.empty_root_edges},
        {"extracted_pairs", m.extracted_pairs},
        {"dropped_pairs", m.dropped_pairs}}},
  };
  return doc.dump(2) + "\n";
}

}  // namespace rlab::corpus
