#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sot {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
std::string replace_all(std::string s, std::string_view from,
                        std::string_view to);
bool iequals(std::string_view a, std::string_view b);

// Fixed-point rendering, e.g. format_fixed(0.510101, 2) == "0.51".
std::string format_fixed(double value, int decimals);
// Like format_fixed but drops trailing zeros and a bare trailing point.
std::string format_trimmed(double value, int max_decimals);

std::string csv_escape(std::string_view field);
std::vector<std::string> parse_csv_line(std::string_view line);

}  // namespace sot
