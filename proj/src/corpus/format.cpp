#include "rlab/corpus/format.hpp"

#include "rlab/util/error.hpp"

namespace rlab::corpus {

std::string format_training_sample(const CommentReplyPair& pair) {
  if (pair.source.empty() || pair.target.empty()) {
    throw Error(ErrorCode::kPrecondition,
                "pair '" + pair.pair_id + "' has an empty side; filtered pairs never do");
  }
  std::string out;
  out.reserve(kCommentPrefix.size() + pair.source.size() + kReplyMarker.size() + 1 +
              pair.target.size());
  out += kCommentPrefix;
  out += pair.source;
  out += kReplyMarker;
  out += ' ';
  out += pair.target;
  return out;
}

}  // namespace rlab::corpus
