#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rlab::model {

using TokenId = std::int32_t;
using TokenSequence = std::vector<TokenId>;

struct SpecialTokens {
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr std::size_t kCount = 4;
};

// Splits text into merge domains: a new chunk starts at every whitespace
// character that follows a non-whitespace one, so " word" keeps its
// leading space. Concatenating the chunks gives back the input.
std::vector<std::string> pretokenize(std::string_view text);

// Byte-pair vocabulary over Unicode code points.
//
// Ids 0..3 are pad, bos, eos, unk; then every code point seen in the training
// corpus in ascending order; then one token per merge. Merges pick the most
// frequent adjacent pair, ties going to the lexicographically smallest
// (left, right).
class Vocab {
 public:
  static Vocab train(const std::vector<std::string>& corpus, std::size_t target_size);
  static Vocab parse(std::string_view contents);

  TokenSequence encode(std::string_view text) const;
  std::string decode(std::span<const TokenId> ids) const;

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }
  std::size_t base_symbol_count() const { return base_symbols_; }

  // "#rlab-vocab v1", "tokens <n>", escaped tokens one per line,
  // "merges <m>", then "left\tright" per line.
  std::string serialize() const;
  std::uint64_t digest() const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.tokens_ == b.tokens_ && a.merges_ == b.merges_;
  }

 private:
  void rebuild_index();
  std::vector<TokenId> encode_chunk(std::string_view chunk) const;

  std::vector<std::string> tokens_;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::size_t base_symbols_ = 0;
  std::unordered_map<std::string, TokenId> index_;
  std::map<std::pair<std::string, std::string>, std::size_t> merge_rank_;
};

}  // namespace rlab::model
