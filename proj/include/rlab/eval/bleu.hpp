#pragma once

#include <array>
#include <string>
#include <vector>

namespace rlab::eval {

inline constexpr std::size_t kBleuMaxOrder = 4;

struct BleuStats {
  std::array<std::size_t, kBleuMaxOrder> matches{};
  std::array<std::size_t, kBleuMaxOrder> totals{};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

// Clipped n-gram matches and totals summed over the corpus, on word_tokens().
BleuStats bleu_stats(const std::vector<std::string>& candidates,
                     const std::vector<std::string>& references);

// Corpus BLEU-4 from sufficient statistics: uniform-weight geometric mean of
// the modified precisions, where an order with zero matches uses
// (0 + 1) / (total + 1), times BP = 1 if c > r else exp(1 - r / c).
// An empty candidate corpus scores 0.
double bleu_from_stats(const BleuStats& stats);

// Returns a value in [0, 1].
double bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references);

}  // namespace rlab::eval
