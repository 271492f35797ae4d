#include <algorithm>
#include <map>
#include <numeric>

#include "doctest.h"
#include "rlab/util/error.hpp"
#include "rlab/util/hash.hpp"
#include "rlab/util/io.hpp"
#include "rlab/util/rng.hpp"
#include "rlab/util/text.hpp"
#include "support/helpers.hpp"

using namespace rlab;

TEST_CASE("fnv64 matches published FNV-1a vectors") {
  CHECK(fnv64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("utf8 decode/encode round trip and invalid bytes") {
  const std::string s = "a\xC3\xA9\xE2\x82\xAC\xF0\x9F\x98\x80";  // a é € 😀
  const auto cps = text::utf8_decode(s);
  REQUIRE(cps.size() == 4);
  CHECK(cps[1] == 0xE9);
  CHECK(cps[3] == 0x1F600);
  std::string back;
  for (char32_t cp : cps) back += text::utf8_encode(cp);
  CHECK(back == s);
  CHECK(text::utf8_length(s) == 4);
  // Truncated multibyte sequence: each stray byte becomes U+FFFD.
  const auto bad = text::utf8_decode("x\xE2\x82");
  REQUIRE(bad.size() == 3);
  CHECK(bad[1] == 0xFFFD);
  CHECK(bad[2] == 0xFFFD);
}

TEST_CASE("word_tokens lowercases and splits punctuation") {
  using V = std::vector<std::string>;
  CHECK(text::word_tokens("Hello, World!") == V{"hello", ",", "world", "!"});
  CHECK(text::word_tokens("  a b　c ") == V{"a", "b", "c"});
  CHECK(text::word_tokens("don't") == V{"don", "'", "t"});
  CHECK(text::word_tokens("") == V{});
  CHECK(text::word_tokens("\xE2\x80\x94") == V{"\xE2\x80\x94"});  // em dash code point is its own token
}

TEST_CASE("normalize_whitespace collapses unicode runs") {
  CHECK(text::normalize_whitespace("  a \t\n b c  ") == "a b c");
  CHECK(text::normalize_whitespace("") == "");
}

TEST_CASE("escape_field round trips control characters") {
  const std::string raw = "tab\there\nnew\\slash\rcr";
  const std::string esc = text::escape_field(raw);
  CHECK(esc.find('\t') == std::string::npos);
  CHECK(esc.find('\n') == std::string::npos);
  CHECK(text::unescape_field(esc) == raw);
}

TEST_CASE("split and trim") {
  CHECK(text::split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
  CHECK(text::trim("  x y \n") == "x y");
  CHECK(text::starts_with("https://x", "https://"));
}

TEST_CASE("uniform_below stays in range and hits every value") {
  Rng rng(5);
  std::map<std::uint64_t, int> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = uniform_below(rng, 7);
    REQUIRE(v < 7);
    ++seen[v];
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("fisher_yates is a seeded permutation") {
  std::vector<int> a(50);
  std::iota(a.begin(), a.end(), 0);
  std::vector<int> b(a);
  Rng r1(11), r2(11);
  fisher_yates(std::span<int>(a), r1);
  fisher_yates(std::span<int>(b), r2);
  CHECK(a == b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(50);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);
  CHECK(a != expect);
}

TEST_CASE("standard_normal has roughly unit variance") {
  Rng rng(3);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("write_file_atomic replaces contents and read_file errors on missing") {
  const auto dir = testing::fresh_dir("util-io");
  const auto p = dir / "f.txt";
  io::write_file_atomic(p, "one");
  io::write_file_atomic(p, "two\nlines\n");
  CHECK(io::read_file(p) == "two\nlines\n");
  CHECK(io::read_lines(p) == std::vector<std::string>{"two", "lines"});
  try {
    io::read_file(dir / "nope");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}
