#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by the token estimator, topic normalization and the
// retrieval tokenizer. Invalid byte sequences decode to U+FFFD, one per byte.
namespace part::text {

std::vector<char32_t> decode(std::string_view utf8);
void append_utf8(std::string& out, char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

// Han ideographs, kana and Hangul syllables.
bool is_cjk(char32_t cp);
bool is_space(char32_t cp);
// Letters and digits for tokenization purposes: ASCII alnum, plus any
// non-ASCII code point that is neither whitespace, punctuation/symbol nor CJK.
bool is_word_char(char32_t cp);

// Simple one-to-one case folding (ASCII, Latin-1, Latin Extended-A, Greek,
// Cyrillic). Code points outside those blocks are returned unchanged.
char32_t fold(char32_t cp);
std::string fold_case(std::string_view utf8);

std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

// Length in code points.
std::size_t length(std::string_view utf8);
std::string truncate(std::string_view utf8, std::size_t max_code_points);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with_icase(std::string_view s, std::string_view prefix);

}  // namespace part::text
