#include "rlab/train/optimizer.hpp"

#include <cmath>

#include "rlab/util/error.hpp"

namespace rlab::train {

std::vector<std::pair<std::string, Tensor*>> trainable_tensors(model::Model& model) {
  std::vector<std::pair<std::string, Tensor*>> out;
  if (!model.adapters.empty()) {
    for (auto& [name, ad] : model.adapters) {
      out.emplace_back("adapter." + name + ".a", &ad.a);
      out.emplace_back("adapter." + name + ".b", &ad.b);
    }
    return out;
  }
  if (model.base_frozen) return out;
  model.weights.for_each([&](const std::string& name, Tensor& t) { out.emplace_back(name, &t); });
  return out;
}

std::vector<std::pair<std::string, Tensor*>> gradient_tensors(model::Gradients& grads,
                                                             const model::Model& model) {
  std::vector<std::pair<std::string, Tensor*>> out;
  if (!model.adapters.empty()) {
    for (auto& [name, g] : grads.adapters) {
      out.emplace_back("adapter." + name + ".a", &g.a);
      out.emplace_back("adapter." + name + ".b", &g.b);
    }
    return out;
  }
  if (grads.base) {
    grads.base->for_each([&](const std::string& name, Tensor& t) { out.emplace_back(name, &t); });
  }
  return out;
}

void adamw_step(std::vector<std::pair<std::string, Tensor*>>& params,
                const std::vector<std::pair<std::string, Tensor*>>& grads, AdamWState& state,
                const AdamWConfig& cfg) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::kInvalidArgument, "parameter and gradient lists differ in length");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& [name, p] = params[k];
    const Tensor& g = *grads[k].second;
    Tensor& m = state.m.try_emplace(name, p->rows, p->cols).first->second;
    Tensor& v = state.v.try_emplace(name, p->rows, p->cols).first->second;
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double gi = g.data[i];
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * gi;
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * gi * gi;
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      p->data[i] -= cfg.learning_rate * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * p->data[i]);
    }
  }
}

double clip_global_norm(const std::vector<std::pair<std::string, Tensor*>>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) {
    for (double v : g->data) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (std::isfinite(norm) && norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (const auto& [name, g] : grads) {
      for (double& v : g->data) v *= s;
    }
  }
  return norm;
}

}  // namespace rlab::train
