#include "rlab/harness/prompt.hpp"

#include "rlab/corpus/format.hpp"
#include "rlab/util/error.hpp"

namespace rlab::harness {

std::string prompt_preamble(std::string_view title, std::string_view community) {
  std::string out = "You are a Reddit user reading a post titled ";
  out += title;
  out += " in the subreddit ";
  out += community;
  out += ".\nThe reply should be engaging, thought-provoking, and mimic a natural Reddit response.\n";
  return out;
}

std::string build_prompt(const ArmConfig& arm, const corpus::CommentReplyPair& pair) {
  std::string unprompted(corpus::kCommentPrefix);
  unprompted += pair.source;
  unprompted += corpus::kReplyMarker;
  if (!arm.prompted) return unprompted;
  if (pair.post_title.empty() || pair.community.empty()) {
    throw Error(ErrorCode::kPrecondition,
                "prompted arm needs post_title and community for pair '" + pair.pair_id + "'");
  }
  return prompt_preamble(pair.post_title, pair.community) + "\n" + unprompted;
}

}  // namespace rlab::harness
