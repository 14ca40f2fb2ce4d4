#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace styleaug {

std::string_view trim_view(std::string_view s);
std::string trim(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char delim);

// Replaces every run of ASCII whitespace with a single space and trims the
// ends. Used before a string is written as a TSV field, which cannot carry
// tabs or line breaks.
std::string collapse_whitespace(std::string_view s);

bool contains_once(std::string_view haystack, std::string_view needle);

// Decodes UTF-8; malformed sequences come back as U+FFFD, one per bad byte.
std::u32string utf8_decode(std::string_view s);
void utf8_append(std::string& out, char32_t cp);

// Simple one-to-one lowercase mapping covering ASCII, Latin-1, Latin
// Extended-A and the basic Greek/Cyrillic blocks. Code points outside those
// ranges pass through unchanged. U+0130 (dotted capital I) maps to 'i'.
char32_t simple_lower(char32_t cp);

// Word constituent for tokenization: ASCII alphanumerics plus letters in the
// Latin-1 Supplement, Latin Extended-A/B, Greek and Cyrillic blocks.
bool is_word_cp(char32_t cp);

std::string now_iso8601_utc();

}  // namespace styleaug
