#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rlab/corpus/types.hpp"
#include "rlab/harness/arms.hpp"
#include "rlab/model/tokenizer.hpp"
#include "rlab/model/transformer.hpp"
#include "rlab/util/rng.hpp"

namespace rlab::harness {

struct GenerationRecord {
  std::string pair_id;
  std::string arm_id;
  std::string prompt_text;
  std::string response_text;
  std::size_t token_count = 0;
  std::string stop_reason;  // "eos", "max_new_tokens" or "context_full"
  std::uint64_t seed = 0;         // run seed
  std::uint64_t stream_seed = 0;  // per-record sampler seed
  double temperature = 0.0;
  std::size_t top_k = 0;
  std::size_t max_new_tokens = 0;
  bool greedy = false;
  bool adapters_loaded = false;
  std::string checkpoint_digest;

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

// The model an arm decodes with, plus the digest of the checkpoint it came from.
struct ArmModel {
  const model::Model* model = nullptr;
  std::string checkpoint_digest;
};

// Picks the next token: argmax when greedy (lowest id on ties), otherwise
// samples from the softmax of logits / temperature restricted to the top_k
// highest logits.
model::TokenId sample_next(std::span<const double> logits, const SamplingConfig& cfg, Rng& rng);

// Sampler seed for one record; independent of record order.
std::uint64_t stream_seed(std::uint64_t run_seed, ArmId arm, std::string_view pair_id);

// One record per test pair. Fine-tuned arms need a model with adapters, raw
// arms one without. Prompts longer than the context keep their newest tokens.
std::vector<GenerationRecord> generate(const ArmConfig& arm, const ArmModel& arm_model,
                                       const model::Vocab& vocab,
                                       const std::vector<corpus::CommentReplyPair>& test);

// Sorted by (arm_id, pair_id).
void sort_records(std::vector<GenerationRecord>& records);

// One JSON object per line.
std::string serialize_records(const std::vector<GenerationRecord>& records);
std::vector<GenerationRecord> parse_records(std::string_view contents);
std::vector<GenerationRecord> load_records(const std::filesystem::path& path);

}  // namespace rlab::harness
