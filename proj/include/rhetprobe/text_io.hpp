#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rhetprobe {

// Shortest decimal that parses back to the same double.
std::string format_exact(double value);
// printf %.6g.
std::string format_sig6(double value);
double parse_double(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

std::string read_text_file(const std::string& path);
// Writes all bytes or throws FormatError.
void write_text_file(const std::string& path, std::string_view contents);

}  // namespace rhetprobe
