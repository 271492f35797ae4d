#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace rlab::adapt {

// The sixteen NormalFloat-4 code points (quantiles of N(0,1) rescaled to
// [-1, 1] with an exact zero), as published with the QLoRA bitsandbytes
// kernels. Stored as their float32 values.
inline constexpr std::array<float, 16> kNf4Codes = {
    -1.0f,
    -0.6961928009986877f,
    -0.5250730514526367f,
    -0.39491748809814453f,
    -0.28444138169288635f,
    -0.18477343022823334f,
    -0.09105003625154495f,
    0.0f,
    0.07958029955625534f,
    0.16093020141124725f,
    0.24611230194568634f,
    0.33791524171829224f,
    0.44070982933044434f,
    0.5626170039176941f,
    0.7229568362236023f,
    1.0f,
};

inline constexpr std::size_t kNf4BlockSize = 64;
inline constexpr std::uint8_t kNf4ZeroCode = 7;

// FNV-1a over the little-endian float32 bit patterns of the table.
std::uint64_t nf4_table_checksum();
// Half of the widest gap between adjacent code points.
double nf4_max_half_gap();
// The 15 decision thresholds between adjacent codes.
const std::array<double, 15>& nf4_thresholds();

struct Nf4Block {
  std::array<std::uint8_t, kNf4BlockSize> codes{};
  double absmax = 0.0;

  friend bool operator==(const Nf4Block&, const Nf4Block&) = default;
};

struct Nf4Tensor {
  std::vector<Nf4Block> blocks;
  std::size_t length = 0;  // unpadded element count
  std::size_t pad = 0;     // zeros appended to fill the last block

  friend bool operator==(const Nf4Tensor&, const Nf4Tensor&) = default;
};

// Per block: absmax = max |w|, each value mapped to the nearest code of
// w / absmax (ties to the lower code).
Nf4Tensor nf4_quantize(std::span<const double> weights, std::size_t block_size = kNf4BlockSize);
std::vector<double> nf4_dequantize(const Nf4Tensor& q);

// Dequantize(quantize(w)), the values a frozen base weight holds in memory.
std::vector<double> nf4_round_trip(std::span<const double> weights);

}  // namespace rlab::adapt
