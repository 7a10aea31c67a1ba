#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace relict::text {

/// Returns the input unchanged when it is valid UTF-8, otherwise re-encodes
/// it as if it were Latin-1.
std::string to_utf8(std::string_view bytes);

/// Decodes numeric (&#NN; &#xHH;) and HTML4 named entities. Unknown or
/// unterminated references are left verbatim.
std::string decode_entities(std::string_view s);

/// Collapses runs of whitespace to a single space and trims both ends.
std::string collapse_whitespace(std::string_view s);

/// Splits on any character that is neither a letter nor a digit and
/// lowercases. No length or digit filtering.
std::vector<std::string> split_words(std::string_view utf8);

/// split_words, then drops tokens shorter than two characters and tokens
/// made only of digits.
std::vector<std::string> tokenize(std::string_view utf8);

/// Splits on ASCII/Unicode whitespace only, keeping punctuation attached.
std::vector<std::string> split_whitespace(std::string_view utf8);

/// Number of Unicode code points in a UTF-8 string.
std::size_t codepoint_count(std::string_view utf8);

std::string to_lower_ascii(std::string_view s);

}  // namespace relict::text
