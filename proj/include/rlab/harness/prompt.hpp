#pragma once

#include <string>
#include <string_view>

#include "rlab/corpus/types.hpp"
#include "rlab/harness/arms.hpp"

namespace rlab::harness {

// Unprompted arms:
//   Comment: <source>\nReply:
// Prompted arms prepend two instruction lines and a blank line:
//   You are a Reddit user reading a post titled <title> in the subreddit <community>.\n
//   The reply should be engaging, thought-provoking, and mimic a natural Reddit response.\n
//   \n
//   Comment: <source>\nReply:
// The community string is substituted verbatim.
std::string build_prompt(const ArmConfig& arm, const corpus::CommentReplyPair& pair);

std::string prompt_preamble(std::string_view title, std::string_view community);

}  // namespace rlab::harness
