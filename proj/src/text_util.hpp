#pragma once

// Line-oriented tokenizing shared by the text formats.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace modrev::detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

struct Line {
  std::string_view text;  // comment stripped
  std::size_t number;     // 1-based
  bool indented;
  std::vector<Token> tokens;
};

/// Splits into non-blank lines with `#` comments removed.
std::vector<Line> split_lines(std::string_view source);

std::vector<Token> tokenize(std::string_view text);

/// Parses a non-negative decimal integer, or returns false.
bool parse_size(std::string_view text, std::size_t& out);

std::string_view trim(std::string_view text);

}  // namespace modrev::detail
