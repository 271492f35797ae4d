#include "rlab/adapt/nf4.hpp"

#include <bit>
#include <cmath>

#include "rlab/simd/kernels.hpp"
#include "rlab/util/error.hpp"
#include "rlab/util/hash.hpp"

namespace rlab::adapt {

std::uint64_t nf4_table_checksum() {
  Fnv64 h;
  for (float c : kNf4Codes) {
    const auto bits = std::bit_cast<std::uint32_t>(c);
    const std::uint8_t bytes[4] = {static_cast<std::uint8_t>(bits), static_cast<std::uint8_t>(bits >> 8),
                                   static_cast<std::uint8_t>(bits >> 16),
                                   static_cast<std::uint8_t>(bits >> 24)};
    h.update(std::span<const std::uint8_t>(bytes, 4));
  }
  return h.value();
}

double nf4_max_half_gap() {
  double widest = 0.0;
  for (std::size_t i = 0; i + 1 < kNf4Codes.size(); ++i) {
    widest = std::fmax(widest, static_cast<double>(kNf4Codes[i + 1]) - static_cast<double>(kNf4Codes[i]));
  }
  return widest / 2.0;
}

const std::array<double, 15>& nf4_thresholds() {
  static const std::array<double, 15> thresholds = [] {
    std::array<double, 15> t{};
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = (static_cast<double>(kNf4Codes[i]) + static_cast<double>(kNf4Codes[i + 1])) / 2.0;
    }
    return t;
  }();
  return thresholds;
}

Nf4Tensor nf4_quantize(std::span<const double> weights, std::size_t block_size) {
  if (block_size != kNf4BlockSize) {
    throw Error(ErrorCode::kInvalidArgument, "NF4 blocks hold exactly 64 values");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i])) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite weight at index " + std::to_string(i));
    }
  }
  Nf4Tensor q;
  q.length = weights.size();
  const std::size_t n_blocks = (weights.size() + block_size - 1) / block_size;
  q.pad = n_blocks * block_size - weights.size();
  q.blocks.resize(n_blocks);

  std::array<double, kNf4BlockSize> buffer{};
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::size_t begin = b * block_size;
    const std::size_t count = std::min(block_size, weights.size() - begin);
    buffer.fill(0.0);
    std::copy_n(weights.begin() + static_cast<std::ptrdiff_t>(begin), count, buffer.begin());
    Nf4Block& block = q.blocks[b];
    block.absmax = simd::max_abs(buffer);
    if (block.absmax == 0.0) {
      block.codes.fill(kNf4ZeroCode);
      continue;
    }
    simd::bucketize(buffer, block.absmax, nf4_thresholds(), block.codes);
  }
  return q;
}

std::vector<double> nf4_dequantize(const Nf4Tensor& q) {
  if (q.blocks.size() * kNf4BlockSize != q.length + q.pad) {
    throw Error(ErrorCode::kInvalidArgument, "NF4 tensor length does not match its block count");
  }
  std::vector<double> out(q.length);
  for (std::size_t i = 0; i < q.length; ++i) {
    const Nf4Block& block = q.blocks[i / kNf4BlockSize];
    const std::uint8_t code = block.codes[i % kNf4BlockSize];
    if (code >= kNf4Codes.size()) throw Error(ErrorCode::kRange, "NF4 code out of range");
    out[i] = static_cast<double>(kNf4Codes[code]) * block.absmax;
  }
  return out;
}

std::vector<double> nf4_round_trip(std::span<const double> weights) {
  return nf4_dequantize(nf4_quantize(weights));
}

}  // namespace rlab::adapt
