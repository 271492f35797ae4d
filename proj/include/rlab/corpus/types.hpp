#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rlab::corpus {

struct ThreadNode {
  std::string id;
  std::optional<std::string> parent_id;  // absent for post roots
  std::string community;
  std::string post_title;
  std::string author;
  std::string body;
  std::int64_t score = 0;
  std::int64_t created_utc = 0;

  bool is_root() const { return !parent_id.has_value(); }
};

// A parent text and its immediate reply. pair_id is the reply's node id,
// which is unique because every node has at most one parent.
struct CommentReplyPair {
  std::string pair_id;
  std::string source;
  std::string target;
  std::string community;
  std::string post_title;
  std::string source_author;
  std::string target_author;

  friend bool operator==(const CommentReplyPair&, const CommentReplyPair&) = default;
};

struct FilterConfig {
  std::size_t min_chars = 20;
  std::size_t min_tokens = 4;
  bool strip_urls = true;
  bool drop_moderation_artifacts = true;
  bool dedup = true;
  std::vector<std::string> blocked_authors{"AutoModerator"};

  void validate() const;
};

}  // namespace rlab::corpus
