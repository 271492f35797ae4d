#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rlab/corpus/extract.hpp"
#include "rlab/corpus/filter.hpp"
#include "rlab/corpus/split.hpp"
#include "rlab/corpus/types.hpp"

namespace rlab::corpus {

// Pairs file: a header line, then one pair per line with tab-separated,
// backslash-escaped fields:
//   pair_id community post_title source_author target_author source target
std::string serialize_pairs(const std::vector<CommentReplyPair>& pairs);
std::vector<CommentReplyPair> parse_pairs(std::string_view contents);
std::vector<CommentReplyPair> load_pairs(const std::filesystem::path& path);

std::string serialize_drop_log(const std::vector<Drop>& drops);

struct CommunityCount {
  std::string name;
  std::size_t post_count = 0;
  std::size_t pair_count = 0;
};

struct CorpusManifest {
  std::vector<CommunityCount> communities;
  FilterConfig filter_config;
  std::uint64_t split_seed = 0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  std::size_t test_size = 0;
  ExtractStats extract_stats;
  std::size_t extracted_pairs = 0;
  std::size_t dropped_pairs = 0;
};

CorpusManifest build_manifest(const std::vector<ThreadNode>& nodes, const Extraction& extraction,
                              const FilterResult& filtered, const FilterConfig& cfg,
                              std::uint64_t seed, const Split& split);

// Pretty-printed JSON with sorted keys.
std::string serialize_manifest(const CorpusManifest& manifest);

}  // namespace rlab::corpus
