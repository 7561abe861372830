#pragma once

#include <string>
#include <string_view>

namespace quarry::text {

std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

/// Simple case fold covering ASCII, Latin-1, Greek and Cyrillic.
char32_t fold(char32_t c);
std::u32string fold(std::u32string_view s);

/// Letters and digits; the rest counts as a word break.
bool is_word_char(char32_t c);
bool is_space(char32_t c);

std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

/// Case-insensitive, whitespace-collapsed comparison key.
std::string comparison_key(std::string_view s);

std::size_t code_point_count(std::string_view s);

}  // namespace quarry::text
