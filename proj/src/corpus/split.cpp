#include "rlab/corpus/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rlab/util/error.hpp"
#include "rlab/util/rng.hpp"

namespace rlab::corpus {

Split split_corpus(const std::vector<CommentReplyPair>& pairs, std::uint64_t seed,
                   std::size_t test_size, double val_fraction) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "val_fraction must be in [0, 1)");
  }
  const std::size_t total = pairs.size();
  const auto val_size = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(total)));
  if (test_size + val_size >= total) {
    throw Error(ErrorCode::kSizing, "cannot split " + std::to_string(total) + " pairs into test=" +
                                        std::to_string(test_size) + " validation=" +
                                        std::to_string(val_size) + " with a non-empty train set");
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  fisher_yates(std::span<std::size_t>(order), rng);

  auto take = [&](std::size_t from, std::size_t to) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(from),
                                 order.begin() + static_cast<std::ptrdiff_t>(to));
    std::sort(idx.begin(), idx.end());
    std::vector<CommentReplyPair> part;
    part.reserve(idx.size());
    for (std::size_t i : idx) part.push_back(pairs[i]);
    return part;
  };
  Split split;
  split.test = take(0, test_size);
  split.validation = take(test_size, test_size + val_size);
  split.train = take(test_size + val_size, total);
  return split;
}

}  // namespace rlab::corpus
