#include "rlab/train/sft.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "rlab/util/error.hpp"
#include "rlab/util/rng.hpp"

namespace rlab::train {

TrainConfig TrainConfig::single_sample_preset() {
  TrainConfig c;
  c.learning_rate = 2e-4;
  c.batch_size = 1;
  c.epochs = 2;
  return c;
}

TrainConfig TrainConfig::large_batch_preset() {
  TrainConfig c;
  c.learning_rate = 2e-5;
  c.batch_size = 64;
  c.epochs = 3;
  return c;
}

void TrainConfig::validate(const model::ModelConfig& model_cfg) const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (context_len > model_cfg.context_len) {
    throw Error(ErrorCode::kInvalidArgument, "train context_len exceeds the model context_len");
  }
  if (checkpoint_every < 1) throw Error(ErrorCode::kInvalidArgument, "checkpoint_every must be >= 1");
}

AdamWConfig TrainConfig::optimizer() const {
  return AdamWConfig{learning_rate, beta1, beta2, eps, weight_decay};
}

double dataset_loss(const model::Model& model, const std::vector<TrainingExample>& examples) {
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& ex : examples) {
    std::size_t scored = 0;
    for (std::size_t i = 1; i < ex.loss_mask.size(); ++i) scored += ex.loss_mask[i] ? 1 : 0;
    if (scored == 0) continue;
    total += model::sequence_loss(model, ex.ids, ex.loss_mask) * static_cast<double>(scored);
    tokens += scored;
  }
  if (tokens == 0) throw Error(ErrorCode::kPrecondition, "no scored tokens in dataset");
  return total / static_cast<double>(tokens);
}

namespace {

void record_losses(TrainState& state, const std::vector<TrainingExample>& train,
                   const std::vector<TrainingExample>& validation) {
  state.train_history.push_back(LossPoint{state.step, dataset_loss(state.model, train)});
  if (!validation.empty()) {
    state.val_history.push_back(LossPoint{state.step, dataset_loss(state.model, validation)});
  }
}

TrainResult train_loop(TrainState state, const std::vector<TrainingExample>& train,
                       const std::vector<TrainingExample>& validation, const TrainConfig& cfg,
                       const TrainHooks& hooks) {
  cfg.validate(state.model.config);
  if (train.empty()) throw Error(ErrorCode::kPrecondition, "train split is empty");
  for (const auto& ex : train) {
    if (ex.ids.size() > cfg.context_len) {
      throw Error(ErrorCode::kRange, "training example longer than context_len");
    }
  }

  TrainResult result;
  if (state.train_history.empty()) record_losses(state, train, validation);
  result.last_snapshot = state;
  if (hooks.checkpoint_path) save_checkpoint(*hooks.checkpoint_path, state);

  const AdamWConfig opt = cfg.optimizer();
  std::vector<std::size_t> order(train.size());
  bool stop = false;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(cfg.seed + 0x9e3779b97f4a7c15ULL * (epoch + 1));
    fisher_yates(std::span<std::size_t>(order), rng);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      if (cfg.max_steps && state.step >= *cfg.max_steps) {
        stop = true;
        break;
      }
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);

      model::Gradients total;
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = train[order[k]];
        auto lg = model::loss_and_grads(state.model, ex.ids, ex.loss_mask);
        batch_loss += lg.loss * inv_batch;
        if (k == start) {
          total = std::move(lg.grads);
          auto dst = gradient_tensors(total, state.model);
          for (auto& [name, g] : dst) {
            for (double& v : g->data) v *= inv_batch;
          }
        } else {
          auto dst = gradient_tensors(total, state.model);
          const auto src = gradient_tensors(lg.grads, state.model);
          for (std::size_t t = 0; t < dst.size(); ++t) {
            for (std::size_t i = 0; i < dst[t].second->size(); ++i) {
              dst[t].second->data[i] += src[t].second->data[i] * inv_batch;
            }
          }
        }
      }
      if (hooks.on_batch_loss) batch_loss = hooks.on_batch_loss(state.step, batch_loss);

      auto grads = gradient_tensors(total, state.model);
      const double norm = clip_global_norm(grads, cfg.grad_clip);
      if (!std::isfinite(batch_loss) || !std::isfinite(norm)) {
        result.diverged = true;
        result.diverged_at_step = state.step;
        state = result.last_snapshot;
        stop = true;
        break;
      }
      auto params = trainable_tensors(state.model);
      adamw_step(params, grads, state.optimizer, opt);
      ++state.step;
      result.curve.push_back(LossPoint{state.step, batch_loss});

      if (state.step % cfg.checkpoint_every == 0) {
        result.last_snapshot = state;
        if (hooks.checkpoint_path) save_checkpoint(*hooks.checkpoint_path, state);
      }
    }
    if (!result.diverged && (state.train_history.empty() || state.train_history.back().step != state.step)) {
      record_losses(state, train, validation);
    }
  }
  result.state = std::move(state);
  return result;
}

}  // namespace

TrainResult run_sft(TrainState initial, const std::vector<TrainingExample>& train,
                    const std::vector<TrainingExample>& validation, const TrainConfig& cfg,
                    const TrainHooks& hooks) {
  if (initial.model.adapters.empty()) {
    throw Error(ErrorCode::kPrecondition, "fine-tuning requires injected adapters");
  }
  initial.kind = "adapter";
  return train_loop(std::move(initial), train, validation, cfg, hooks);
}

TrainResult pretrain_base(TrainState initial, const std::vector<TrainingExample>& train,
                          const std::vector<TrainingExample>& validation, const TrainConfig& cfg,
                          const TrainHooks& hooks) {
  if (!initial.model.adapters.empty() || initial.model.base_frozen) {
    throw Error(ErrorCode::kPrecondition, "base training needs an unfrozen model without adapters");
  }
  initial.kind = "base";
  return train_loop(std::move(initial), train, validation, cfg, hooks);
}

std::string serialize_loss_curve(const LossCurve& curve) {
  std::string out = "step\tloss\n";
  char buf[64];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\n", p.step, p.loss);
    out += buf;
  }
  return out;
}

}  // namespace rlab::train
