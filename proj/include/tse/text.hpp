#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tse::text {

bool is_nfc(std::string_view utf8);
std::string to_nfc(std::string_view utf8);

// Number of Unicode code points in a UTF-8 string.
std::size_t code_points(std::string_view utf8);

// Uppercases the first code point (full case mapping is not needed for the
// scripts we generate).
std::string capitalize_first(std::string_view utf8);

// Splits on runs of ASCII whitespace; no empty tokens.
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& words, std::string_view sep = " ");

bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

}  // namespace tse::text
