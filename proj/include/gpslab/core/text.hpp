#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gpslab::text {

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);
// Splits on runs of spaces/tabs, dropping empty pieces.
std::vector<std::string_view> split_ws(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;
bool starts_with_icase(std::string_view s, std::string_view prefix) noexcept;
bool all_digits(std::string_view s) noexcept;
bool is_hex_digit(char c) noexcept;

// Whole-string numeric parses; nullopt on any trailing garbage.
std::optional<std::int64_t> to_int(std::string_view s);
std::optional<double> to_double(std::string_view s);

// Splits on whitespace; double-quoted tokens may contain spaces and \" escapes.
// Quotes may also appear after '=' (key="a b"). Returns nullopt on an
// unterminated quote.
std::optional<std::vector<std::string>> tokenize(std::string_view line);

// Percent-encoding for bytes outside 0x21..0x7E plus '%', '=', ';'.
std::string percent_encode(std::string_view s);
std::optional<std::string> percent_decode(std::string_view s);

}  // namespace gpslab::text
