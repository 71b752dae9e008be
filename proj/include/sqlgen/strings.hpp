#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sqlgen {

// ASCII-only case folding; non-ASCII bytes pass through untouched.
char ascii_lower(char c);
std::string fold_case(std::string_view s);
bool fold_equal(std::string_view a, std::string_view b);

std::string trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with(std::string_view s, std::string_view prefix);

// Formats a double so that parsing it back is exact (max_digits10).
std::string format_double(double v);

}  // namespace sqlgen
