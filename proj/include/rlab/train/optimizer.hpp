#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rlab/model/transformer.hpp"

namespace rlab::train {

struct AdamWConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// First and second moments keyed by trainable-tensor name.
struct AdamWState {
  std::size_t step = 0;
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;

  friend bool operator==(const AdamWState&, const AdamWState&) = default;
};

// (name, tensor) for everything loss_and_grads differentiates: the adapter
// factors "adapter.<target>.a|b" when adapters are attached, otherwise every
// base tensor unless the base is frozen.
std::vector<std::pair<std::string, Tensor*>> trainable_tensors(model::Model& model);
// Gradients in the same order as trainable_tensors.
std::vector<std::pair<std::string, Tensor*>> gradient_tensors(model::Gradients& grads,
                                                             const model::Model& model);

// Decoupled weight decay Adam, full precision.
void adamw_step(std::vector<std::pair<std::string, Tensor*>>& params,
                const std::vector<std::pair<std::string, Tensor*>>& grads, AdamWState& state,
                const AdamWConfig& cfg);

// Scales gradients so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_global_norm(const std::vector<std::pair<std::string, Tensor*>>& grads, double max_norm);

}  // namespace rlab::train
