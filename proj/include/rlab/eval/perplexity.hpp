#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rlab/model/transformer.hpp"
#include "rlab/train/example.hpp"

namespace rlab::eval {

// Any next-token model: ids -> N x vocab logits, row i scoring ids[i + 1].
using LogitsFn = std::function<Tensor(std::span<const model::TokenId>)>;

// exp(-(1/N) * sum log P(w_i)) over the given per-token log-probabilities.
double perplexity_from_log_probs(std::span<const double> log_probs);

// Scores every token after the first of each sequence; N is the total number
// of scored tokens across sequences.
double perplexity(const LogitsFn& model, const std::vector<model::TokenSequence>& sequences);
double perplexity(const model::Model& model, const std::vector<model::TokenSequence>& sequences);

// Same formula restricted to each example's loss mask, e.g. reply tokens
// given a prompt.
double masked_perplexity(const model::Model& model, const std::vector<train::TrainingExample>& examples);

}  // namespace rlab::eval
