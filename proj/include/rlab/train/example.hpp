#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "rlab/corpus/types.hpp"
#include "rlab/model/tokenizer.hpp"

namespace rlab::train {

struct TrainingExample {
  model::TokenSequence ids;
  std::vector<std::uint8_t> loss_mask;  // mask[i] scores ids[i]
};

// Tokenizes "<bos>Comment: <source>\nReply:" + " <target><eos>". With
// mask_prompt only the reply tokens and eos are scored. Over-length samples
// lose their oldest prompt tokens first; the reply is cut from the end only
// when it alone cannot fit.
TrainingExample make_sft_example(const corpus::CommentReplyPair& pair, const model::Vocab& vocab,
                                 std::size_t context_len, bool mask_prompt = true);

// Generic prompt/completion variant of the above.
TrainingExample make_completion_example(std::string_view prompt, std::string_view completion,
                                        const model::Vocab& vocab, std::size_t context_len,
                                        bool mask_prompt);

// "<bos>text<eos>" with every token scored, cut to context_len.
TrainingExample make_lm_example(std::string_view text, const model::Vocab& vocab,
                                std::size_t context_len);

// Left-truncates prompt tokens (keeping <bos>) so that at most max_len ids
// remain.
model::TokenSequence truncate_prompt(model::TokenSequence prompt_with_bos, std::size_t max_len);

}  // namespace rlab::train
