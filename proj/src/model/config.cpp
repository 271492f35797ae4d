#include "rlab/model/config.hpp"

#include "rlab/util/error.hpp"
#include "rlab/util/hash.hpp"

namespace rlab::model {

void ModelConfig::validate() const {
  if (vocab_size <= 4) throw Error(ErrorCode::kInvalidArgument, "vocab_size must exceed the special tokens");
  if (context_len < 8 || context_len > kMaxContextLen) {
    throw Error(ErrorCode::kInvalidArgument, "context_len must be in [8, 512]");
  }
  if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0) {
    throw Error(ErrorCode::kInvalidArgument, "d_model must be a positive multiple of n_heads");
  }
  if (n_layers == 0 || d_ff == 0) throw Error(ErrorCode::kInvalidArgument, "n_layers and d_ff must be positive");
}

std::string ModelConfig::canonical() const {
  return "vocab_size=" + std::to_string(vocab_size) + ";context_len=" + std::to_string(context_len) +
         ";d_model=" + std::to_string(d_model) + ";n_heads=" + std::to_string(n_heads) +
         ";n_layers=" + std::to_string(n_layers) + ";d_ff=" + std::to_string(d_ff) +
         ";seed=" + std::to_string(seed);
}

std::uint64_t ModelConfig::digest() const { return fnv64(canonical()); }

}  // namespace rlab::model
