#pragma once

#include <string>
#include <string_view>

#include "rlab/corpus/types.hpp"

namespace rlab::corpus {

inline constexpr std::string_view kCommentPrefix = "Comment: ";
inline constexpr std::string_view kReplyMarker = "\nReply:";

// "Comment: <source>\nReply: <target>", no trailing newline.
std::string format_training_sample(const CommentReplyPair& pair);

}  // namespace rlab::corpus
