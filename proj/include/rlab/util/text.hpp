#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rlab::text {

// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD, one per byte.
std::vector<char32_t> utf8_decode(std::string_view s);
std::string utf8_encode(char32_t cp);
// Splits into per-code-point UTF-8 substrings.
std::vector<std::string> utf8_chars(std::string_view s);
std::size_t utf8_length(std::string_view s);

bool is_unicode_space(char32_t cp);
bool is_punctuation(char32_t cp);

// Collapses every run of Unicode whitespace to one ASCII space and trims.
std::string normalize_whitespace(std::string_view s);

// Lowercases ASCII letters and splits on whitespace and punctuation
// boundaries. Each punctuation code point becomes its own token.
std::vector<std::string> word_tokens(std::string_view s);

// Backslash escaping for tab-separated, line-oriented files:
// '\\' -> "\\\\", '\t' -> "\\t", '\n' -> "\\n", '\r' -> "\\r".
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace rlab::text
