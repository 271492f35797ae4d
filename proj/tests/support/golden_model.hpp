#pragma once

#include "rlab/model/transformer.hpp"
#include "support/helpers.hpp"

namespace rlab::testing {

inline model::ModelConfig golden_model_config() { return tiny_config(7, 32, 16, 16, 2, 2, 32); }

inline model::TokenSequence golden_model_sequence() {
  Rng rng(42);
  return random_sequence(rng, 12, 32);
}

}  // namespace rlab::testing
