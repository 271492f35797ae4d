#pragma once

#include <cstdint>
#include <string>

namespace rlab::model {

struct ModelConfig {
  std::size_t vocab_size = 512;
  std::size_t context_len = 256;
  std::size_t d_model = 48;
  std::size_t n_heads = 4;
  std::size_t n_layers = 2;
  std::size_t d_ff = 128;
  std::uint64_t seed = 1;

  std::size_t head_dim() const { return d_model / n_heads; }
  void validate() const;
  // "key=value;..." in a fixed key order; the digest hashes this string.
  std::string canonical() const;
  std::uint64_t digest() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline constexpr std::size_t kMaxContextLen = 512;

}  // namespace rlab::model
