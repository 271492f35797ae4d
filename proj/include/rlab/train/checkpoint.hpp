#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rlab/model/transformer.hpp"
#include "rlab/train/optimizer.hpp"

namespace rlab::train {

struct LossPoint {
  std::size_t step = 0;
  double loss = 0.0;

  friend bool operator==(const LossPoint&, const LossPoint&) = default;
};

struct TrainState {
  std::string kind = "base";  // "base" or "adapter"
  std::string vocab_digest;
  model::Model model;
  AdamWState optimizer;
  std::size_t step = 0;
  std::vector<LossPoint> train_history;  // full train-set loss, step 0 and every epoch
  std::vector<LossPoint> val_history;    // validation loss, same schedule

  friend bool operator==(const TrainState&, const TrainState&) = default;
};

inline constexpr std::uint16_t kCheckpointVersion = 1;

// Container layout, all integers little-endian:
//   "RLAB" | u16 version | u32 header length | header (JSON text) | payload
// The header carries the model config and its digest, the tensor directory
// (name, dtype, shape, offset, byte length; NF4 entries add block count and
// pad length), loss histories and an FNV-1a checksum of the payload. Frozen
// base projection weights are stored as NF4: all packed codes (low nibble
// first), then one f64 absmax per block. Everything else is f64.
std::string serialize_checkpoint(const TrainState& state);
TrainState parse_checkpoint(std::string_view bytes,
                            const std::optional<model::ModelConfig>& expected = std::nullopt);

void save_checkpoint(const std::filesystem::path& path, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& path,
                           const std::optional<model::ModelConfig>& expected = std::nullopt);

std::uint64_t checkpoint_digest(const std::filesystem::path& path);

// Replaces every projection weight by its NF4 round trip and freezes the base.
void quantize_base(model::Model& model);

}  // namespace rlab::train
