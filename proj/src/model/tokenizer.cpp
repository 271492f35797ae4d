#include "rlab/model/tokenizer.hpp"

#include <algorithm>
#include <set>

#include "rlab/util/error.hpp"
#include "rlab/util/hash.hpp"
#include "rlab/util/text.hpp"

namespace rlab::model {

namespace {

using Symbols = std::vector<std::string>;

constexpr const char* kSpecialNames[SpecialTokens::kCount] = {"<pad>", "<bos>", "<eos>", "<unk>"};

bool is_space_byte_start(const std::string& ch) {
  const auto cps = text::utf8_decode(ch);
  return !cps.empty() && text::is_unicode_space(cps.front());
}

// Replaces every non-overlapping occurrence of (left, right), scanning left
// to right.
void apply_merge(Symbols& symbols, const std::string& left, const std::string& right) {
  Symbols out;
  out.reserve(symbols.size());
  std::size_t i = 0;
  while (i < symbols.size()) {
    if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
      out.push_back(left + right);
      i += 2;
    } else {
      out.push_back(std::move(symbols[i]));
      ++i;
    }
  }
  symbols = std::move(out);
}

}  // namespace

std::vector<std::string> pretokenize(std::string_view input) {
  std::vector<std::string> chunks;
  std::string current;
  bool prev_space = true;
  for (const std::string& ch : text::utf8_chars(input)) {
    const bool space = is_space_byte_start(ch);
    if (space && !prev_space && !current.empty()) {
      chunks.push_back(std::move(current));
      current.clear();
    }
    current += ch;
    prev_space = space;
  }
  if (!current.empty()) chunks.push_back(std::move(current));
  return chunks;
}

Vocab Vocab::train(const std::vector<std::string>& corpus, std::size_t target_size) {
  if (corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot train a vocabulary on an empty corpus");

  std::map<std::string, std::size_t> word_counts;
  std::set<char32_t> alphabet;
  for (const auto& doc : corpus) {
    for (const auto cp : text::utf8_decode(doc)) alphabet.insert(cp);
    for (auto& chunk : pretokenize(doc)) ++word_counts[chunk];
  }
  if (alphabet.empty()) throw Error(ErrorCode::kInvalidArgument, "corpus contains no symbols");
  if (target_size <= SpecialTokens::kCount + alphabet.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "target_size " + std::to_string(target_size) + " must exceed special tokens + " +
                    std::to_string(alphabet.size()) + " base symbols");
  }

  Vocab vocab;
  for (const char* name : kSpecialNames) vocab.tokens_.emplace_back(name);
  for (char32_t cp : alphabet) vocab.tokens_.push_back(text::utf8_encode(cp));
  vocab.base_symbols_ = alphabet.size();

  std::vector<std::pair<Symbols, std::size_t>> words;
  words.reserve(word_counts.size());
  for (const auto& [word, count] : word_counts) words.emplace_back(text::utf8_chars(word), count);

  std::set<std::string> known(vocab.tokens_.begin() + SpecialTokens::kCount, vocab.tokens_.end());
  while (vocab.tokens_.size() < target_size) {
    std::map<std::pair<std::string, std::string>, std::size_t> pair_counts;
    for (const auto& [symbols, count] : words) {
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) pair_counts[{symbols[i], symbols[i + 1]}] += count;
    }
    if (pair_counts.empty()) break;
    // std::map iterates in lexicographic order, so the first maximum wins ties.
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const auto [left, right] = best->first;
    vocab.merges_.emplace_back(left, right);
    if (known.insert(left + right).second) vocab.tokens_.push_back(left + right);
    for (auto& [symbols, count] : words) apply_merge(symbols, left, right);
  }
  vocab.rebuild_index();
  return vocab;
}

void Vocab::rebuild_index() {
  index_.clear();
  merge_rank_.clear();
  for (std::size_t i = SpecialTokens::kCount; i < tokens_.size(); ++i) {
    index_.emplace(tokens_[i], static_cast<TokenId>(i));
  }
  for (std::size_t r = 0; r < merges_.size(); ++r) merge_rank_.emplace(merges_[r], r);
}

std::vector<TokenId> Vocab::encode_chunk(std::string_view chunk) const {
  Symbols symbols = text::utf8_chars(chunk);
  while (symbols.size() > 1) {
    std::size_t best_rank = merge_rank_.size();
    std::size_t best_at = symbols.size();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = merge_rank_.find({symbols[i], symbols[i + 1]});
      if (it != merge_rank_.end() && it->second < best_rank) {
        best_rank = it->second;
        best_at = i;
      }
    }
    if (best_at == symbols.size()) break;
    const auto& [left, right] = merges_[best_rank];
    apply_merge(symbols, left, right);
  }
  std::vector<TokenId> ids;
  ids.reserve(symbols.size());
  for (const auto& s : symbols) {
    auto it = index_.find(s);
    ids.push_back(it == index_.end() ? SpecialTokens::kUnk : it->second);
  }
  return ids;
}

TokenSequence Vocab::encode(std::string_view input) const {
  TokenSequence ids;
  for (const auto& chunk : pretokenize(input)) {
    const auto part = encode_chunk(chunk);
    ids.insert(ids.end(), part.begin(), part.end());
  }
  return ids;
}

std::string Vocab::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
      throw Error(ErrorCode::kRange, "token id " + std::to_string(id) + " outside vocabulary");
    }
    if (id == SpecialTokens::kUnk) {
      out += "\xEF\xBF\xBD";
    } else if (static_cast<std::size_t>(id) >= SpecialTokens::kCount) {
      out += tokens_[static_cast<std::size_t>(id)];
    }
  }
  return out;
}

std::string Vocab::serialize() const {
  std::string out = "#rlab-vocab v1\ntokens " + std::to_string(tokens_.size()) + "\n";
  for (const auto& t : tokens_) out += text::escape_field(t) + "\n";
  out += "merges " + std::to_string(merges_.size()) + "\n";
  for (const auto& [l, r] : merges_) out += text::escape_field(l) + "\t" + text::escape_field(r) + "\n";
  return out;
}

std::uint64_t Vocab::digest() const { return fnv64(serialize()); }

Vocab Vocab::parse(std::string_view contents) {
  const auto lines = text::split(contents, '\n');
  auto fail = [](const std::string& why) { return Error(ErrorCode::kParse, "vocab file: " + why); };
  if (lines.size() < 2 || lines[0] != "#rlab-vocab v1") throw fail("bad header");
  if (!text::starts_with(lines[1], "tokens ")) throw fail("missing token count");
  const std::size_t n_tokens = std::stoul(lines[1].substr(7));
  if (lines.size() < 3 + n_tokens) throw fail("truncated token list");
  Vocab vocab;
  for (std::size_t i = 0; i < n_tokens; ++i) vocab.tokens_.push_back(text::unescape_field(lines[2 + i]));
  if (n_tokens < SpecialTokens::kCount) throw fail("missing special tokens");
  for (std::size_t i = 0; i < SpecialTokens::kCount; ++i) {
    if (vocab.tokens_[i] != kSpecialNames[i]) throw fail("special token mismatch at id " + std::to_string(i));
  }
  const std::string& merge_line = lines[2 + n_tokens];
  if (!text::starts_with(merge_line, "merges ")) throw fail("missing merge count");
  const std::size_t n_merges = std::stoul(merge_line.substr(7));
  if (lines.size() < 3 + n_tokens + n_merges) throw fail("truncated merge list");
  for (std::size_t i = 0; i < n_merges; ++i) {
    const auto parts = text::split(lines[3 + n_tokens + i], '\t');
    if (parts.size() != 2) throw fail("malformed merge line " + std::to_string(i));
    vocab.merges_.emplace_back(text::unescape_field(parts[0]), text::unescape_field(parts[1]));
  }
  std::size_t base = 0;
  for (std::size_t i = SpecialTokens::kCount; i < vocab.tokens_.size(); ++i) {
    if (text::utf8_length(vocab.tokens_[i]) == 1) ++base;
  }
  vocab.base_symbols_ = base;
  vocab.rebuild_index();
  return vocab;
}

}  // namespace rlab::model
