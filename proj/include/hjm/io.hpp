#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hjm::io {

/// Shortest decimal form that round-trips; empty string for NaN (CSV gap).
std::string format_number(double value);
/// Parses a decimal with dot separator; throws ValidationError.
double parse_number(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);
/// Reads the next non-empty line, stripping a trailing '\r'. Returns false at EOF.
bool read_line(std::istream& in, std::string& line);

}  // namespace hjm::io
