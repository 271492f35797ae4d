#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rlab/corpus/types.hpp"

namespace rlab::corpus {

enum class DropReason {
  kBlockedAuthor,
  kModerationArtifact,
  kTooShort,
  kTooFewTokens,
  kDuplicate,
};

std::string_view drop_reason_name(DropReason reason);

struct Drop {
  std::string pair_id;
  DropReason reason;
};

struct FilterResult {
  std::vector<CommentReplyPair> retained;
  std::vector<Drop> drop_log;
};

// URL pattern: a token starting with "http://", "https://" or "www." and
// running to the next whitespace.
std::string strip_urls(std::string_view text);
bool is_moderation_placeholder(std::string_view body);

FilterResult filter_pairs(const std::vector<CommentReplyPair>& pairs, const FilterConfig& cfg);

}  // namespace rlab::corpus
