#pragma once

#include <cstdint>
#include <vector>

#include "rlab/corpus/types.hpp"

namespace rlab::corpus {

inline constexpr std::size_t kDefaultTestSize = 48;
inline constexpr double kDefaultValFraction = 0.1;

struct Split {
  std::vector<CommentReplyPair> train;
  std::vector<CommentReplyPair> validation;
  std::vector<CommentReplyPair> test;
};

// Seeded Fisher-Yates over pair indices; the first test_size shuffled indices
// form the test set, the next floor(val_fraction * total) the validation set.
// Each partition keeps input order.
Split split_corpus(const std::vector<CommentReplyPair>& pairs, std::uint64_t seed,
                   std::size_t test_size = kDefaultTestSize,
                   double val_fraction = kDefaultValFraction);

}  // namespace rlab::corpus
