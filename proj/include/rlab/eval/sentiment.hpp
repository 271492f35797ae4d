#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rlab::eval {

class SentimentLexicon {
 public:
  // Keys are case-folded on insert. Needs at least one positive and one
  // negative weight.
  explicit SentimentLexicon(std::unordered_map<std::string, double> entries);

  // The bundled ~200-word lexicon.
  static const SentimentLexicon& builtin();
  // "word<TAB>weight" lines; '#' starts a comment.
  static SentimentLexicon parse(std::string_view contents);
  static SentimentLexicon load(const std::filesystem::path& path);

  // Sum of weights over word_tokens(text).
  double score(std::string_view text) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, double> entries_;
};

// Percentage of pairs whose score signs agree; a zero score only agrees with
// another zero.
double sentiment_alignment(const std::vector<std::string>& generated,
                           const std::vector<std::string>& references,
                           const SentimentLexicon& lexicon);

}  // namespace rlab::eval
