#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace rlab {

// 64-bit FNV-1a. Used for config digests, artifact names and checksums;
// not a cryptographic hash.
class Fnv64 {
 public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  Fnv64& update(std::span<const std::uint8_t> bytes) {
    for (std::uint8_t b : bytes) {
      state_ ^= b;
      state_ *= kPrime;
    }
    return *this;
  }
  Fnv64& update(std::string_view text) {
    return update(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  Fnv64& update_u64(std::uint64_t v) {
    std::uint8_t bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return update(std::span<const std::uint8_t>(bytes, 8));
  }

  std::uint64_t value() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kOffset;
};

inline std::uint64_t fnv64(std::string_view text) { return Fnv64{}.update(text).value(); }

// Lowercase, zero-padded 16-character hex.
std::string hex64(std::uint64_t v);

}  // namespace rlab
