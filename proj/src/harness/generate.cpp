#include "rlab/harness/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "rlab/harness/prompt.hpp"
#include "rlab/train/example.hpp"
#include "rlab/util/error.hpp"
#include "rlab/util/hash.hpp"
#include "rlab/util/io.hpp"

namespace rlab::harness {

using model::SpecialTokens;
using model::TokenId;

TokenId sample_next(std::span<const double> logits, const SamplingConfig& cfg, Rng& rng) {
  if (logits.empty()) throw Error(ErrorCode::kInvalidArgument, "empty logits");
  if (cfg.greedy) {
    return static_cast<TokenId>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  }
  std::vector<std::size_t> idx(logits.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t k = std::min(cfg.top_k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return logits[a] > logits[b] || (logits[a] == logits[b] && a < b);
                    });
  const double top = logits[idx[0]] / cfg.temperature;
  std::vector<double> weights(k);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    weights[i] = std::exp(logits[idx[i]] / cfg.temperature - top);
    sum += weights[i];
  }
  const double u = uniform_unit(rng) * sum;
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<TokenId>(idx[i]);
  }
  return static_cast<TokenId>(idx[k - 1]);
}

std::uint64_t stream_seed(std::uint64_t run_seed, ArmId arm, std::string_view pair_id) {
  return Fnv64{}.update_u64(run_seed).update(arm_name(arm)).update("\x1f").update(pair_id).value();
}

std::vector<GenerationRecord> generate(const ArmConfig& arm, const ArmModel& arm_model,
                                       const model::Vocab& vocab,
                                       const std::vector<corpus::CommentReplyPair>& test) {
  arm.sampling.validate();
  if (!arm_model.model) throw Error(ErrorCode::kMissingCheckpoint, "no model loaded for arm");
  const model::Model& m = *arm_model.model;
  if (arm.fine_tuned && m.adapters.empty()) {
    throw Error(ErrorCode::kMissingCheckpoint,
                std::string(arm_name(arm.id)) + " needs a fine-tuned adapter checkpoint");
  }
  if (!arm.fine_tuned && !m.adapters.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(arm_name(arm.id)) + " is a raw arm but the model carries adapters");
  }
  if (vocab.size() > m.config.vocab_size) {
    throw Error(ErrorCode::kInvalidArgument, "vocabulary larger than the model's embedding table");
  }
  const std::size_t ctx = m.config.context_len;
  const std::size_t prompt_limit = ctx - 1 - std::min(arm.sampling.max_new_tokens, ctx / 2);

  std::vector<GenerationRecord> records;
  records.reserve(test.size());
  for (const auto& pair : test) {
    GenerationRecord rec;
    rec.pair_id = pair.pair_id;
    rec.arm_id = std::string(arm_name(arm.id));
    rec.prompt_text = build_prompt(arm, pair);
    rec.seed = arm.sampling.seed;
    rec.stream_seed = stream_seed(arm.sampling.seed, arm.id, pair.pair_id);
    rec.temperature = arm.sampling.temperature;
    rec.top_k = arm.sampling.top_k;
    rec.max_new_tokens = arm.sampling.max_new_tokens;
    rec.greedy = arm.sampling.greedy;
    rec.adapters_loaded = !m.adapters.empty();
    rec.checkpoint_digest = arm_model.checkpoint_digest;

    model::TokenSequence prompt{SpecialTokens::kBos};
    const auto body = vocab.encode(rec.prompt_text);
    prompt.insert(prompt.end(), body.begin(), body.end());
    prompt = train::truncate_prompt(std::move(prompt), prompt_limit);

    model::IncrementalDecoder decoder(m);
    std::vector<double> logits;
    for (TokenId id : prompt) logits = decoder.step(id);

    Rng rng(rec.stream_seed);
    model::TokenSequence generated;
    rec.stop_reason = "max_new_tokens";
    while (generated.size() < arm.sampling.max_new_tokens) {
      const TokenId next = sample_next(logits, arm.sampling, rng);
      if (next == SpecialTokens::kEos) {
        rec.stop_reason = "eos";
        break;
      }
      generated.push_back(next);
      if (decoder.full()) {
        rec.stop_reason = "context_full";
        break;
      }
      if (generated.size() < arm.sampling.max_new_tokens) logits = decoder.step(next);
    }
    rec.token_count = generated.size();
    rec.response_text = vocab.decode(generated);
    if (!rec.response_text.empty() && rec.response_text.front() == ' ') rec.response_text.erase(0, 1);
    records.push_back(std::move(rec));
  }
  return records;
}

void sort_records(std::vector<GenerationRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.arm_id, a.pair_id) < std::tie(b.arm_id, b.pair_id);
  });
}

std::string serialize_records(const std::vector<GenerationRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json j = {{"pair_id", r.pair_id},
                        {"arm_id", r.arm_id},
                        {"prompt_text", r.prompt_text},
                        {"response_text", r.response_text},
                        {"token_count", r.token_count},
                        {"stop_reason", r.stop_reason},
                        {"seed", r.seed},
                        {"stream_seed", r.stream_seed},
                        {"temperature", r.temperature},
                        {"top_k", r.top_k},
                        {"max_new_tokens", r.max_new_tokens},
                        {"greedy", r.greedy},
                        {"adapters_loaded", r.adapters_loaded},
                        {"checkpoint_digest", r.checkpoint_digest}};
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<GenerationRecord> parse_records(std::string_view contents) {
  std::vector<GenerationRecord> records;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const std::string_view line = contents.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      GenerationRecord r;
      r.pair_id = j.at("pair_id").get<std::string>();
      r.arm_id = j.at("arm_id").get<std::string>();
      r.prompt_text = j.at("prompt_text").get<std::string>();
      r.response_text = j.at("response_text").get<std::string>();
      r.token_count = j.at("token_count").get<std::size_t>();
      r.stop_reason = j.at("stop_reason").get<std::string>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.stream_seed = j.at("stream_seed").get<std::uint64_t>();
      r.temperature = j.at("temperature").get<double>();
      r.top_k = j.at("top_k").get<std::size_t>();
      r.max_new_tokens = j.at("max_new_tokens").get<std::size_t>();
      r.greedy = j.at("greedy").get<bool>();
      r.adapters_loaded = j.at("adapters_loaded").get<bool>();
      r.checkpoint_digest = j.at("checkpoint_digest").get<std::string>();
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, "records line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::vector<GenerationRecord> load_records(const std::filesystem::path& path) {
  return parse_records(io::read_file(path));
}

}  // namespace rlab::harness
