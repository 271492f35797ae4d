#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlab/adapt/lora.hpp"
#include "rlab/model/config.hpp"
#include "rlab/model/tensor.hpp"
#include "rlab/model/tokenizer.hpp"

namespace rlab::model {

struct LayerWeights {
  Tensor ln1_gain, ln1_bias;
  Tensor wq, wk, wv, wo;  // d_model x d_model, y = W x
  Tensor ln2_gain, ln2_bias;
  Tensor w_up, b_up;      // d_ff x d_model, 1 x d_ff
  Tensor w_down, b_down;  // d_model x d_ff, 1 x d_model

  friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

struct ModelWeights {
  Tensor token_embedding;     // vocab x d_model
  Tensor position_embedding;  // context x d_model
  std::vector<LayerWeights> layers;
  Tensor final_gain, final_bias;
  Tensor lm_head;  // vocab x d_model

  static ModelWeights zeros_like(const ModelConfig& cfg);

  // Visits every tensor with its stable name ("layers.0.attn.wq", ...), in a
  // fixed order.
  template <class F>
  void for_each(F&& f);
  template <class F>
  void for_each(F&& f) const;

  Tensor* find(const std::string& name);
  const Tensor* find(const std::string& name) const;

  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

// Names of the per-layer projection matrices that can carry an adapter and
// that are stored 4-bit quantized in checkpoints.
std::vector<std::string> linear_weight_names(const ModelConfig& cfg);

// Pre-norm decoder-only transformer with learned absolute positions, causal
// multi-head attention and a GELU feed-forward block.
struct Model {
  ModelConfig config;
  ModelWeights weights;
  adapt::AdapterSet adapters;
  bool base_frozen = false;

  static Model init(const ModelConfig& cfg);

  friend bool operator==(const Model&, const Model&) = default;
};

// N x vocab logits; row i scores the token following ids[0..i].
Tensor forward(const Model& model, std::span<const TokenId> ids);

// Row-wise log-softmax.
Tensor log_softmax_rows(const Tensor& logits);

struct AdapterGrads {
  Tensor a, b;
};

struct Gradients {
  std::optional<ModelWeights> base;  // present only when the base is trainable
  std::map<std::string, AdapterGrads> adapters;
};

struct LossAndGrads {
  double loss = 0.0;
  std::size_t scored_tokens = 0;
  Gradients grads;
};

// loss_mask has one flag per position: mask[i] scores ids[i] given ids[0..i-1].
// mask[0] is ignored since the first token has no context. The loss is the mean
// negative log-probability over scored tokens; gradients cover exactly the
// trainable set (adapters if attached, otherwise all base weights).
LossAndGrads loss_and_grads(const Model& model, std::span<const TokenId> ids,
                            std::span<const std::uint8_t> loss_mask);

// Loss only, same definition as loss_and_grads.
double sequence_loss(const Model& model, std::span<const TokenId> ids,
                     std::span<const std::uint8_t> loss_mask);

// Token-at-a-time decoding with cached keys and values. Produces the same
// logits as forward() on the full prefix.
class IncrementalDecoder {
 public:
  explicit IncrementalDecoder(const Model& model);

  // Appends a token and returns the logits for the next position.
  std::vector<double> step(TokenId id);
  std::size_t length() const { return length_; }
  bool full() const { return length_ >= model_.config.context_len; }

 private:
  const Model& model_;
  std::size_t length_ = 0;
  std::vector<Tensor> keys_;    // per layer: context x d_model
  std::vector<Tensor> values_;  // per layer: context x d_model
};

template <class F>
void ModelWeights::for_each(F&& f) {
  f(std::string("tok_emb"), token_embedding);
  f(std::string("pos_emb"), position_embedding);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    auto& L = layers[l];
    f(p + "ln1.gain", L.ln1_gain);
    f(p + "ln1.bias", L.ln1_bias);
    f(p + "attn.wq", L.wq);
    f(p + "attn.wk", L.wk);
    f(p + "attn.wv", L.wv);
    f(p + "attn.wo", L.wo);
    f(p + "ln2.gain", L.ln2_gain);
    f(p + "ln2.bias", L.ln2_bias);
    f(p + "ffn.w_up", L.w_up);
    f(p + "ffn.b_up", L.b_up);
    f(p + "ffn.w_down", L.w_down);
    f(p + "ffn.b_down", L.b_down);
  }
  f(std::string("ln_f.gain"), final_gain);
  f(std::string("ln_f.bias"), final_bias);
  f(std::string("lm_head"), lm_head);
}

template <class F>
void ModelWeights::for_each(F&& f) const {
  const_cast<ModelWeights*>(this)->for_each(
      [&](const std::string& name, Tensor& t) { f(name, static_cast<const Tensor&>(t)); });
}

}  // namespace rlab::model
