#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fracecon {

/// Parses `key = value` lines. `#` starts a comment, blank lines are skipped.
/// Throws std::invalid_argument naming the line on malformed input or
/// duplicate keys.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::map<std::string, std::string> load_key_values(const std::string& path);

double parse_real(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
/// Comma- or whitespace-separated list of reals.
std::vector<double> parse_real_list(std::string_view text, std::string_view what);
std::vector<std::int64_t> parse_int_list(std::string_view text, std::string_view what);

}  // namespace fracecon
