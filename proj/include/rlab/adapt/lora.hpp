#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rlab/model/tensor.hpp"

namespace rlab::model {
struct Model;
}

namespace rlab::adapt {

// Trainable low-rank update beside a frozen weight W (d_out x d_in):
//   y = W x + (alpha / rank) * B (A x)
struct LoraAdapter {
  std::string target;
  std::size_t rank = 0;
  double alpha = 0.0;
  Tensor a;  // rank x d_in
  Tensor b;  // d_out x rank, zero at initialization

  double scale() const { return alpha / static_cast<double>(rank); }

  friend bool operator==(const LoraAdapter&, const LoraAdapter&) = default;
};

using AdapterSet = std::map<std::string, LoraAdapter>;

struct LoraOptions {
  std::size_t rank = 8;
  double alpha = 16.0;
  double init_std = 0.02;
  std::uint64_t seed = 0x10ba;
};

// Attention query and value projections of every layer.
std::vector<std::string> default_targets(std::size_t n_layers);

// Freezes the base weights and attaches one adapter per target. A is drawn
// from N(0, init_std^2); B starts at zero so the model output is unchanged.
void inject_adapters(model::Model& model, const std::vector<std::string>& targets,
                     const LoraOptions& options = {});

// Folds every adapter into its base weight, W' = W + (alpha/rank) B A, and
// returns a plain model with no adapters.
model::Model merge_adapters(const model::Model& adapted);

struct ParamBudget {
  std::uint64_t total_params = 0;
  std::uint64_t trainable_params = 0;

  // 100 * trainable / total, evaluated as an exact ratio and then rounded.
  double trainable_percent() const;
  // "X trainable parameters (Y% of total)"
  std::string report_line(int decimals = 2) const;
};

// trainable = adapter A and B elements (zero without adapters);
// total = base + adapter elements.
ParamBudget count_params(const model::Model& model);

}  // namespace rlab::adapt
