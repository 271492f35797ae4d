#include "rlab/train/example.hpp"

#include "rlab/corpus/format.hpp"
#include "rlab/util/error.hpp"

namespace rlab::train {

using model::SpecialTokens;
using model::TokenSequence;

TokenSequence truncate_prompt(TokenSequence prompt, std::size_t max_len) {
  if (prompt.size() <= max_len) return prompt;
  if (max_len == 0) return {};
  const std::size_t drop = prompt.size() - max_len;
  prompt.erase(prompt.begin() + 1, prompt.begin() + 1 + static_cast<std::ptrdiff_t>(drop));
  return prompt;
}

TrainingExample make_completion_example(std::string_view prompt, std::string_view completion,
                                        const model::Vocab& vocab, std::size_t context_len,
                                        bool mask_prompt) {
  if (context_len < 3) throw Error(ErrorCode::kInvalidArgument, "context_len too small for an example");
  TokenSequence head{SpecialTokens::kBos};
  const auto p = vocab.encode(prompt);
  head.insert(head.end(), p.begin(), p.end());
  TokenSequence tail = vocab.encode(completion);
  tail.push_back(SpecialTokens::kEos);

  // Keep <bos> plus at least one prompt token; the reply yields only past that.
  const std::size_t reply_budget = context_len - std::min<std::size_t>(head.size(), 2);
  if (tail.size() > reply_budget) tail.resize(reply_budget);
  head = truncate_prompt(std::move(head), context_len - tail.size());

  TrainingExample ex;
  ex.ids = head;
  ex.ids.insert(ex.ids.end(), tail.begin(), tail.end());
  ex.loss_mask.assign(ex.ids.size(), mask_prompt ? 0 : 1);
  for (std::size_t i = head.size(); i < ex.ids.size(); ++i) ex.loss_mask[i] = 1;
  ex.loss_mask[0] = 0;
  return ex;
}

TrainingExample make_sft_example(const corpus::CommentReplyPair& pair, const model::Vocab& vocab,
                                 std::size_t context_len, bool mask_prompt) {
  if (pair.source.empty() || pair.target.empty()) {
    throw Error(ErrorCode::kPrecondition, "pair '" + pair.pair_id + "' has an empty side");
  }
  std::string prompt(corpus::kCommentPrefix);
  prompt += pair.source;
  prompt += corpus::kReplyMarker;
  return make_completion_example(prompt, " " + pair.target, vocab, context_len, mask_prompt);
}

TrainingExample make_lm_example(std::string_view text, const model::Vocab& vocab,
                                std::size_t context_len) {
  TrainingExample ex;
  ex.ids.push_back(SpecialTokens::kBos);
  const auto body = vocab.encode(text);
  ex.ids.insert(ex.ids.end(), body.begin(), body.end());
  ex.ids.push_back(SpecialTokens::kEos);
  if (ex.ids.size() > context_len) ex.ids.resize(context_len);
  ex.loss_mask.assign(ex.ids.size(), 1);
  ex.loss_mask[0] = 0;
  return ex;
}

}  // namespace rlab::train
