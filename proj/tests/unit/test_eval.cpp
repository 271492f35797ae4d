#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "rlab/eval/bleu.hpp"
#include "rlab/eval/perplexity.hpp"
#include "rlab/eval/report.hpp"
#include "rlab/eval/sentiment.hpp"
#include "rlab/util/error.hpp"
#include "support/helpers.hpp"

using namespace rlab;
using namespace rlab::eval;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected rlab::Error");
  return ErrorCode::kInvalidArgument;
}

struct BleuFixture {
  const char* name;
  std::vector<std::string> candidates;
  std::vector<std::string> references;
  double expected;  // tests/oracles/bleu_oracle.py
};

const std::vector<BleuFixture>& bleu_fixtures() {
  static const std::vector<BleuFixture> f = {
      {"identical", {"the cat sat on the mat"}, {"the cat sat on the mat"}, 1.0},
      {"short_candidate", {"the cat sat"}, {"the cat sat down"}, 0.7165313105737893},
      {"disjoint", {"a b c d"}, {"e f g h"}, 0.3021375397356768},
      {"clipping", {"the the the the the the the"}, {"the cat is on the mat"}, 0.19205612637498934},
      {"punctuation_case", {"Hello, World! It is fine."}, {"hello world ! it is fine ."}, 0.7071067811865476},
      {"corpus_two_pairs",
       {"the quick brown fox jumps", "a lazy dog sleeps all day long"},
       {"the quick brown fox jumped over", "the lazy dog sleeps all day"},
       0.6364324737554576},
      {"longer_candidate", {"we should fund the new rail line now please"}, {"we should fund the rail line"},
       0.3549481056010053},
  };
  return f;
}

Tensor uniform_logits(std::size_t n, std::size_t vocab) { return Tensor(n, vocab, 0.0); }

}  // namespace

TEST_CASE("bleu: oracle fixtures within 1e-9") {
  for (const auto& f : bleu_fixtures()) {
    CAPTURE(f.name);
    CHECK(std::abs(bleu(f.candidates, f.references) - f.expected) <= 1e-9);
  }
  CHECK(bleu({"same words here"}, {"same words here"}) == 1.0);
}

TEST_CASE("bleu: sufficient statistics by hand") {
  const auto s = bleu_stats({"the the the the the the the"}, {"the cat is on the mat"});
  CHECK(s.matches[0] == 2);
  CHECK(s.totals[0] == 7);
  CHECK(s.matches[1] == 0);
  CHECK(s.totals[3] == 4);
  CHECK(s.candidate_length == 7);
  CHECK(s.reference_length == 6);
  BleuStats empty;
  CHECK(bleu_from_stats(empty) == 0.0);
}

TEST_CASE("bleu: corpus score is invariant to pair order, bounded, errors") {
  Rng rng(4);
  const std::vector<std::string> words{"a", "b", "c", "the", "dog", "cat", "runs", "."};
  for (int t = 0; t < 30; ++t) {
    std::vector<std::string> cands, refs;
    const std::size_t n = 1 + uniform_below(rng, 6);
    for (std::size_t i = 0; i < n; ++i) {
      std::string c, r;
      for (std::size_t k = 0, len = 1 + uniform_below(rng, 9); k < len; ++k) c += words[uniform_below(rng, 8)] + " ";
      for (std::size_t k = 0, len = 1 + uniform_below(rng, 9); k < len; ++k) r += words[uniform_below(rng, 8)] + " ";
      cands.push_back(c);
      refs.push_back(r);
    }
    const double b = bleu(cands, refs);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    fisher_yates(std::span<std::size_t>(perm), rng);
    std::vector<std::string> pc, pr;
    for (auto i : perm) {
      pc.push_back(cands[i]);
      pr.push_back(refs[i]);
    }
    CHECK(bleu(pc, pr) == doctest::Approx(b).epsilon(1e-14));
  }
  CHECK(code_of([] { bleu({"a"}, {"a", "b"}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { bleu({}, {}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("perplexity: uniform 256 and the two-token case") {
  const LogitsFn uniform = [](std::span<const model::TokenId> ids) { return uniform_logits(ids.size(), 256); };
  Rng rng(3);
  std::vector<model::TokenSequence> seqs;
  for (int i = 0; i < 5; ++i) seqs.push_back(testing::random_sequence(rng, 2 + uniform_below(rng, 20), 256));
  CHECK(std::abs(perplexity(uniform, seqs) - 256.0) <= 1e-6);

  const std::vector<double> lp{std::log(0.5), std::log(0.25)};
  CHECK(std::abs(perplexity_from_log_probs(lp) - std::exp(std::log(8.0) / 2.0)) <= 1e-9);
  CHECK(perplexity_from_log_probs(std::vector<double>{0.0, 0.0}) == 1.0);
  CHECK(code_of([] { perplexity_from_log_probs({}); }) == ErrorCode::kPrecondition);
}

TEST_CASE("perplexity equals exp of the mean full-mask NLL (20 random pairs)") {
  const model::Model m = model::Model::init(testing::tiny_config(21));
  Rng rng(8);
  std::vector<model::TokenSequence> all;
  double nll = 0;
  std::size_t n = 0;
  for (int t = 0; t < 20; ++t) {
    const auto ids = testing::random_sequence(rng, 2 + uniform_below(rng, 15), 32);
    const std::vector<std::uint8_t> ones(ids.size(), 1);
    const double loss = model::sequence_loss(m, ids, ones);
    CHECK(std::abs(perplexity(m, {ids}) - std::exp(loss)) <= 1e-6 * std::exp(loss));
    nll += loss * static_cast<double>(ids.size() - 1);
    n += ids.size() - 1;
    all.push_back(ids);
  }
  const double expect = std::exp(nll / static_cast<double>(n));
  CHECK(std::abs(perplexity(m, all) - expect) <= 1e-9 * expect);
}

TEST_CASE("masked perplexity scores only masked tokens") {
  const model::Model m = model::Model::init(testing::tiny_config(2));
  train::TrainingExample ex{{1, 5, 6, 7, 8}, {0, 0, 0, 1, 1}};
  const Tensor lp = model::log_softmax_rows(model::forward(m, ex.ids));
  const double expect = std::exp(-(lp(2, 7) + lp(3, 8)) / 2.0);
  CHECK(masked_perplexity(m, {ex}) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(code_of([&] { masked_perplexity(m, {train::TrainingExample{{1, 2}, {0, 0}}}); }) ==
        ErrorCode::kPrecondition);
}

TEST_CASE("report formats") {
  const std::vector<MetricRow> rows{{"AI-1 (Raw Unprompted)", 0.01234, 35.06, 41.66666},
                                    {"AI-4 (Fine-Tuned Prompted)", 0.015, 6.64, 33.333}};
  CHECK(render_report(rows, ReportFormat::kTableText) ==
        "Model | BLEU Score | Perplexity | Sentiment Alignment (%)\n"
        "---------------------------------------------------------\n"
        "AI-1 (Raw Unprompted) | 1.2 | 35.1 | 41.7\n"
        "AI-4 (Fine-Tuned Prompted) | 1.5 | 6.6 | 33.3\n");
  CHECK(render_report(rows, ReportFormat::kDelimited) ==
        "Model\tBLEU Score\tPerplexity\tSentiment Alignment (%)\n"
        "AI-1 (Raw Unprompted)\t1.2\t35.1\t41.7\n"
        "AI-4 (Fine-Tuned Prompted)\t1.5\t6.6\t33.3\n");
  CHECK(parse_report_format("tsv") == ReportFormat::kDelimited);
  CHECK(code_of([] { parse_report_format("csv"); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { render_report({}, ReportFormat::kTableText); }) == ErrorCode::kInvalidArgument);
  const auto back = parse_metric_rows(serialize_metric_rows(rows));
  REQUIRE(back.size() == 2);
  CHECK(back[0].perplexity == rows[0].perplexity);
  CHECK(back[1].sentiment_alignment == rows[1].sentiment_alignment);
  CHECK(code_of([] { parse_metric_rows("{\"bleu\": 1}\n"); }) == ErrorCode::kParse);
}

TEST_CASE("sentiment: scoring and alignment") {
  const SentimentLexicon lex({{"Good", 1.0}, {"bad", -1.0}, {"great", 2.0}});
  CHECK(lex.score("GOOD good, bad!") == 1.0);
  CHECK(lex.score("nothing here") == 0.0);
  CHECK(sentiment_alignment({"good", "bad", "meh", "great", "bad"}, {"great", "good", "meh", "meh", "bad"}, lex) ==
        doctest::Approx(60.0));
  CHECK(code_of([] { SentimentLexicon({{"good", 1.0}}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { SentimentLexicon({{"two words", 1.0}, {"x", -1.0}}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { sentiment_alignment({"a"}, {}, lex); }) == ErrorCode::kInvalidArgument);

  const auto parsed = SentimentLexicon::parse("# comment\nnice\t1.5\nugly\t-2\n\n");
  CHECK(parsed.size() == 2);
  CHECK(parsed.score("nice ugly") == -0.5);
  CHECK(code_of([] { SentimentLexicon::parse("nice 1.5\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { SentimentLexicon::parse("nice\tabc\n"); }) == ErrorCode::kParse);

  const auto& b = SentimentLexicon::builtin();
  CHECK(b.size() >= 150);
  CHECK(b.score("This is awesome and amazing") > 0);
  CHECK(b.score("An awful, absurd idea") < 0);
}

TEST_CASE("sentiment alignment is symmetric and 100 on identical lists") {
  const auto& lex = SentimentLexicon::builtin();
  Rng rng(6);
  const std::vector<std::string> words{"awesome", "awful", "agree", "angry", "the", "plan", "is"};
  for (int t = 0; t < 20; ++t) {
    std::vector<std::string> a, b;
    for (int i = 0; i < 8; ++i) {
      std::string x, y;
      for (int k = 0; k < 3; ++k) {
        x += words[uniform_below(rng, 7)] + " ";
        y += words[uniform_below(rng, 7)] + " ";
      }
      a.push_back(x);
      b.push_back(y);
    }
    CHECK(sentiment_alignment(a, b, lex) == sentiment_alignment(b, a, lex));
    CHECK(sentiment_alignment(a, a, lex) == 100.0);
  }
}
