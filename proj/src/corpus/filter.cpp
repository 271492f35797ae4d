#include "rlab/corpus/filter.hpp"

#include <algorithm>
#include <unordered_set>

#include "rlab/util/error.hpp"
#include "rlab/util/text.hpp"

namespace rlab::corpus {

void FilterConfig::validate() const {
  if (min_chars < 1) throw Error(ErrorCode::kInvalidArgument, "min_chars must be >= 1");
  if (min_tokens < 1) throw Error(ErrorCode::kInvalidArgument, "min_tokens must be >= 1");
}

std::string_view drop_reason_name(DropReason reason) {
  switch (reason) {
    case DropReason::kBlockedAuthor: return "blocked_author";
    case DropReason::kModerationArtifact: return "moderation_artifact";
    case DropReason::kTooShort: return "too_short";
    case DropReason::kTooFewTokens: return "too_few_tokens";
    case DropReason::kDuplicate: return "duplicate";
  }
  return "unknown";
}

std::string strip_urls(std::string_view input) {
  std::string out;
  out.reserve(input.size());
  std::size_t i = 0;
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (i < input.size()) {
    const bool at_token_start = i == 0 || is_ws(input[i - 1]);
    const std::string_view rest = input.substr(i);
    if (at_token_start && (text::starts_with(rest, "http://") || text::starts_with(rest, "https://") ||
                           text::starts_with(rest, "www."))) {
      while (i < input.size() && !is_ws(input[i])) ++i;
      continue;
    }
    out.push_back(input[i]);
    ++i;
  }
  return text::normalize_whitespace(out);
}

bool is_moderation_placeholder(std::string_view body) {
  return body == "[deleted]" || body == "[removed]";
}

FilterResult filter_pairs(const std::vector<CommentReplyPair>& pairs, const FilterConfig& cfg) {
  cfg.validate();
  FilterResult result;
  std::unordered_set<std::string> seen;
  auto blocked = [&](const std::string& author) {
    return std::find(cfg.blocked_authors.begin(), cfg.blocked_authors.end(), author) !=
           cfg.blocked_authors.end();
  };
  auto drop = [&](const CommentReplyPair& p, DropReason r) {
    result.drop_log.push_back(Drop{p.pair_id, r});
  };

  for (const CommentReplyPair& original : pairs) {
    if (blocked(original.source_author) || blocked(original.target_author)) {
      drop(original, DropReason::kBlockedAuthor);
      continue;
    }
    if (cfg.drop_moderation_artifacts &&
        (is_moderation_placeholder(original.source) || is_moderation_placeholder(original.target))) {
      drop(original, DropReason::kModerationArtifact);
      continue;
    }
    CommentReplyPair pair = original;
    if (cfg.strip_urls) {
      pair.source = strip_urls(pair.source);
      pair.target = strip_urls(pair.target);
    }
    if (text::utf8_length(pair.source) < cfg.min_chars ||
        text::utf8_length(pair.target) < cfg.min_chars) {
      drop(original, DropReason::kTooShort);
      continue;
    }
    if (text::word_tokens(pair.source).size() < cfg.min_tokens ||
        text::word_tokens(pair.target).size() < cfg.min_tokens) {
      drop(original, DropReason::kTooFewTokens);
      continue;
    }
    if (cfg.dedup) {
      std::string key = text::normalize_whitespace(pair.source);
      key.push_back('\0');
      key += text::normalize_whitespace(pair.target);
      if (!seen.insert(std::move(key)).second) {
        drop(original, DropReason::kDuplicate);
        continue;
      }
    }
    result.retained.push_back(std::move(pair));
  }
  return result;
}

}  // namespace rlab::corpus
