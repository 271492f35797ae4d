#include "rlab/eval/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rlab/util/error.hpp"
#include "rlab/util/text.hpp"

namespace rlab::eval {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

BleuStats bleu_stats(const std::vector<std::string>& candidates,
                     const std::vector<std::string>& references) {
  if (candidates.size() != references.size()) {
    throw Error(ErrorCode::kInvalidArgument, "BLEU needs one reference per candidate (" +
                                                 std::to_string(candidates.size()) + " vs " +
                                                 std::to_string(references.size()) + ")");
  }
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "BLEU needs at least one pair");
  BleuStats stats;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto cand = text::word_tokens(candidates[k]);
    const auto ref = text::word_tokens(references[k]);
    stats.candidate_length += cand.size();
    stats.reference_length += ref.size();
    for (std::size_t n = 1; n <= kBleuMaxOrder; ++n) {
      const auto cand_counts = count_ngrams(cand, n);
      const auto ref_counts = count_ngrams(ref, n);
      for (const auto& [gram, count] : cand_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) stats.matches[n - 1] += std::min(count, it->second);
      }
      if (cand.size() >= n) stats.totals[n - 1] += cand.size() - n + 1;
    }
  }
  return stats;
}

double bleu_from_stats(const BleuStats& stats) {
  if (stats.candidate_length == 0) return 0.0;
  double log_precision = 0.0;
  for (std::size_t n = 0; n < kBleuMaxOrder; ++n) {
    const double m = static_cast<double>(stats.matches[n]);
    const double t = static_cast<double>(stats.totals[n]);
    log_precision += stats.matches[n] == 0 ? std::log(1.0 / (t + 1.0)) : std::log(m / t);
  }
  const double c = static_cast<double>(stats.candidate_length);
  const double r = static_cast<double>(stats.reference_length);
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_precision / static_cast<double>(kBleuMaxOrder));
}

double bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references) {
  return bleu_from_stats(bleu_stats(candidates, references));
}

}  // namespace rlab::eval
