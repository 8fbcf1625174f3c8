#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace forumdiv::csv {

/// Quotes a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

/// Joins escaped fields with commas (no trailing newline).
std::string join(const std::vector<std::string>& fields);

/// %.9g
std::string format_real(double value);

/// Splits CSV text into records, honoring quoted fields. Throws ParseError on
/// an unterminated quote.
std::vector<std::vector<std::string>> parse(std::string_view text);

}  // namespace forumdiv::csv
