#include "rlab/eval/perplexity.hpp"

#include <cmath>

#include "rlab/train/sft.hpp"
#include "rlab/util/error.hpp"

namespace rlab::eval {

double perplexity_from_log_probs(std::span<const double> log_probs) {
  if (log_probs.empty()) throw Error(ErrorCode::kPrecondition, "perplexity over zero tokens");
  double sum = 0.0;
  for (double lp : log_probs) sum += lp;
  return std::exp(-sum / static_cast<double>(log_probs.size()));
}

double perplexity(const LogitsFn& model, const std::vector<model::TokenSequence>& sequences) {
  std::vector<double> log_probs;
  for (const auto& seq : sequences) {
    if (seq.empty()) throw Error(ErrorCode::kInvalidArgument, "empty sequence in perplexity input");
    if (seq.size() < 2) continue;
    const Tensor lp = model::log_softmax_rows(model(seq));
    for (std::size_t i = 1; i < seq.size(); ++i) {
      log_probs.push_back(lp(i - 1, static_cast<std::size_t>(seq[i])));
    }
  }
  return perplexity_from_log_probs(log_probs);
}

double perplexity(const model::Model& m, const std::vector<model::TokenSequence>& sequences) {
  return perplexity([&](std::span<const model::TokenId> ids) { return model::forward(m, ids); },
                    sequences);
}

double masked_perplexity(const model::Model& model, const std::vector<train::TrainingExample>& examples) {
  return std::exp(train::dataset_loss(model, examples));
}

}  // namespace rlab::eval
