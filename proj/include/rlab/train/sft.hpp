#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rlab/train/checkpoint.hpp"
#include "rlab/train/example.hpp"
#include "rlab/train/optimizer.hpp"

namespace rlab::train {

struct TrainConfig {
  double learning_rate = 2e-4;
  std::size_t batch_size = 1;
  std::size_t epochs = 2;
  std::size_t context_len = 256;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  bool mask_prompt = true;
  std::size_t checkpoint_every = 50;  // steps between rollback snapshots
  double grad_clip = 1.0;
  std::optional<std::size_t> max_steps;  // unset = run all epochs

  // lr 2e-4, batch 1, 2 epochs.
  static TrainConfig single_sample_preset();
  // lr 2e-5, batch 64, 3 epochs.
  static TrainConfig large_batch_preset();

  void validate(const model::ModelConfig& model_cfg) const;
  AdamWConfig optimizer() const;
};

using LossCurve = std::vector<LossPoint>;

struct TrainHooks {
  // Sees every batch loss before it is checked; returning a non-finite value
  // simulates divergence.
  std::function<double(std::size_t step, double loss)> on_batch_loss;
  // Snapshots are also written here when set.
  std::optional<std::filesystem::path> checkpoint_path;
};

struct TrainResult {
  TrainState state;
  LossCurve curve;  // (step, batch loss) per optimizer step
  bool diverged = false;
  std::size_t diverged_at_step = 0;
  TrainState last_snapshot;
};

// Token-weighted mean negative log-likelihood over a set of examples.
double dataset_loss(const model::Model& model, const std::vector<TrainingExample>& examples);

// Adapter fine-tuning. The model must carry adapters; only they change.
// A non-finite batch loss or gradient norm stops training and restores the
// last snapshot.
TrainResult run_sft(TrainState initial, const std::vector<TrainingExample>& train,
                    const std::vector<TrainingExample>& validation, const TrainConfig& cfg,
                    const TrainHooks& hooks = {});

// Full-parameter language-model training of a base model without adapters.
TrainResult pretrain_base(TrainState initial, const std::vector<TrainingExample>& train,
                          const std::vector<TrainingExample>& validation, const TrainConfig& cfg,
                          const TrainHooks& hooks = {});

// "step\tloss" lines under a header.
std::string serialize_loss_curve(const LossCurve& curve);

}  // namespace rlab::train
