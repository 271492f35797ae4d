#include "rlab/eval/sentiment.hpp"

#include <cmath>

#include "rlab/util/error.hpp"
#include "rlab/util/io.hpp"
#include "rlab/util/text.hpp"

namespace rlab::eval {

SentimentLexicon::SentimentLexicon(std::unordered_map<std::string, double> entries) {
  bool has_pos = false;
  bool has_neg = false;
  for (auto& [word, weight] : entries) {
    if (!std::isfinite(weight)) throw Error(ErrorCode::kInvalidArgument, "non-finite weight for '" + word + "'");
    const auto folded = text::word_tokens(word);
    if (folded.size() != 1) throw Error(ErrorCode::kInvalidArgument, "lexicon entry '" + word + "' is not one token");
    has_pos = has_pos || weight > 0.0;
    has_neg = has_neg || weight < 0.0;
    entries_[folded.front()] = weight;
  }
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::kInvalidArgument, "lexicon needs at least one positive and one negative entry");
  }
}

const SentimentLexicon& SentimentLexicon::builtin() {
  static const SentimentLexicon lexicon(std::unordered_map<std::string, double>{
      {"absurd", -1.0},
      {"accurate", 1.0},
      {"afraid", -1.0},
      {"agree", 1.0},
      {"agreed", 1.0},
      {"amazing", 2.0},
      {"anger", -1.0},
      {"angry", -1.0},
      {"annoying", -1.0},
      {"appreciate", 1.0},
      {"awesome", 2.0},
      {"awful", -2.0},
      {"bad", -1.0},
      {"beautiful", 1.0},
      {"benefit", 1.0},
      {"benefits", 1.0},
      {"best", 1.0},
      {"better", 1.0},
      {"biased", -1.0},
      {"blame", -1.0},
      {"boring", -1.0},
      {"brave", 1.0},
      {"brilliant", 2.0},
      {"broken", -1.0},
      {"calm", 1.0},
      {"chaos", -1.0},
      {"clear", 1.0},
      {"clever", 1.0},
      {"comfortable", 1.0},
      {"confident", 1.0},
      {"correct", 1.0},
      {"corrupt", -1.0},
      {"corruption", -1.0},
      {"crazy", -1.0},
      {"crisis", -1.0},
      {"cruel", -1.0},
      {"dangerous", -1.0},
      {"decent", 1.0},
      {"disaster", -2.0},
      {"disgusting", -2.0},
      {"dishonest", -1.0},
      {"doubt", -1.0},
      {"dumb", -1.0},
      {"easy", 1.0},
      {"enjoy", 1.0},
      {"enjoyed", 1.0},
      {"evil", -2.0},
      {"excellent", 2.0},
      {"exciting", 1.0},
      {"fail", -1.0},
      {"failed", -1.0},
      {"failure", -1.0},
      {"fair", 1.0},
      {"fake", -1.0},
      {"false", -1.0},
      {"fantastic", 2.0},
      {"favorite", 1.0},
      {"fear", -1.0},
      {"fool", -1.0},
      {"foolish", -1.0},
      {"fraud", -1.0},
      {"free", 1.0},
      {"freedom", 1.0},
      {"friendly", 1.0},
      {"fun", 1.0},
      {"funny", 1.0},
      {"garbage", -1.0},
      {"generous", 1.0},
      {"gentle", 1.0},
      {"genuine", 1.0},
      {"glad", 1.0},
      {"good", 1.0},
      {"great", 1.0},
      {"greedy", -1.0},
      {"happy", 1.0},
      {"harm", -1.0},
      {"harmful", -1.0},
      {"hate", -2.0},
      {"hated", -2.0},
      {"healthy", 1.0},
      {"helpful", 1.0},
      {"hero", 1.0},
      {"honest", 1.0},
      {"hope", 1.0},
      {"hopeful", 1.0},
      {"horrible", -2.0},
      {"hostile", -1.0},
      {"hurt", -1.0},
      {"hypocrisy", -1.0},
      {"hypocrite", -1.0},
      {"idiot", -1.0},
      {"idiotic", -1.0},
      {"improve", 1.0},
      {"improved", 1.0},
      {"incompetent", -1.0},
      {"incredible", 2.0},
      {"insane", -1.0},
      {"insightful", 1.0},
      {"inspiring", 1.0},
      {"interesting", 1.0},
      {"kind", 1.0},
      {"lazy", -1.0},
      {"liar", -1.0},
      {"lie", -1.0},
      {"lies", -1.0},
      {"like", 1.0},
      {"liked", 1.0},
      {"lose", -1.0},
      {"loser", -1.0},
      {"losing", -1.0},
      {"love", 2.0},
      {"loved", 2.0},
      {"lucky", 1.0},
      {"lying", -1.0},
      {"mess", -1.0},
      {"misleading", -1.0},
      {"nasty", -1.0},
      {"nice", 1.0},
      {"nonsense", -1.0},
      {"outstanding", 2.0},
      {"painful", -1.0},
      {"pathetic", -2.0},
      {"peace", 1.0},
      {"peaceful", 1.0},
      {"perfect", 2.0},
      {"pleasant", 1.0},
      {"polite", 1.0},
      {"poor", -1.0},
      {"positive", 1.0},
      {"problem", -1.0},
      {"problems", -1.0},
      {"promising", 1.0},
      {"propaganda", -1.0},
      {"proud", 1.0},
      {"reasonable", 1.0},
      {"reassuring", 1.0},
      {"refreshing", 1.0},
      {"reliable", 1.0},
      {"respect", 1.0},
      {"ridiculous", -1.0},
      {"right", 1.0},
      {"rude", -1.0},
      {"sad", -1.0},
      {"safe", 1.0},
      {"scam", -1.0},
      {"scared", -1.0},
      {"selfish", -1.0},
      {"shame", -1.0},
      {"shameful", -1.0},
      {"sick", -1.0},
      {"smart", 1.0},
      {"solid", 1.0},
      {"sorry", -1.0},
      {"strong", 1.0},
      {"stupid", -1.0},
      {"success", 1.0},
      {"successful", 1.0},
      {"superb", 2.0},
      {"support", 1.0},
      {"supportive", 1.0},
      {"terrible", -2.0},
      {"thank", 1.0},
      {"thanks", 1.0},
      {"thoughtful", 1.0},
      {"threat", -1.0},
      {"thriving", 1.0},
      {"toxic", -1.0},
      {"trash", -1.0},
      {"true", 1.0},
      {"trust", 1.0},
      {"trusted", 1.0},
      {"ugly", -1.0},
      {"unfair", -1.0},
      {"upset", -1.0},
      {"useful", 1.0},
      {"useless", -1.0},
      {"valid", 1.0},
      {"valuable", 1.0},
      {"waste", -1.0},
      {"weak", -1.0},
      {"welcome", 1.0},
      {"well", 1.0},
      {"win", 1.0},
      {"winning", 1.0},
      {"wise", 1.0},
      {"wonderful", 2.0},
      {"worried", -1.0},
      {"worry", -1.0},
      {"worst", -2.0},
      {"worth", 1.0},
      {"worthless", -1.0},
      {"wrong", -1.0},
  });
  return lexicon;
}

SentimentLexicon SentimentLexicon::parse(std::string_view contents) {
  std::unordered_map<std::string, double> entries;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(contents, '\n')) {
    ++line_no;
    const std::string line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto parts = text::split(line, '\t');
    if (parts.size() != 2) {
      throw Error(ErrorCode::kParse, "lexicon line " + std::to_string(line_no) + ": expected word<TAB>weight");
    }
    try {
      std::size_t used = 0;
      const double w = std::stod(parts[1], &used);
      if (used != parts[1].size()) throw std::invalid_argument("trailing characters");
      entries[parts[0]] = w;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "lexicon line " + std::to_string(line_no) + ": bad weight '" + parts[1] + "'");
    }
  }
  return SentimentLexicon(std::move(entries));
}

SentimentLexicon SentimentLexicon::load(const std::filesystem::path& path) {
  return parse(io::read_file(path));
}

double SentimentLexicon::score(std::string_view text) const {
  double total = 0.0;
  for (const auto& token : text::word_tokens(text)) {
    auto it = entries_.find(token);
    if (it != entries_.end()) total += it->second;
  }
  return total;
}

double sentiment_alignment(const std::vector<std::string>& generated,
                           const std::vector<std::string>& references,
                           const SentimentLexicon& lexicon) {
  if (generated.size() != references.size()) {
    throw Error(ErrorCode::kInvalidArgument, "sentiment alignment needs one reference per response");
  }
  if (generated.empty()) throw Error(ErrorCode::kInvalidArgument, "sentiment alignment needs at least one pair");
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  std::size_t aligned = 0;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    if (sign(lexicon.score(generated[i])) == sign(lexicon.score(references[i]))) ++aligned;
  }
  return 100.0 * static_cast<double>(aligned) / static_cast<double>(generated.size());
}

}  // namespace rlab::eval
