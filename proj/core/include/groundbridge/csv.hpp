#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace groundbridge::csv {

// Shortest round-trip decimal representation of a double.
std::string format_double(double v);
// Fixed-point with the given number of decimals.
std::string format_fixed(double v, int decimals);

std::vector<std::string> split_line(std::string_view line, char sep = ',');
std::string join(const std::vector<std::string>& fields, char sep = ',');

double parse_double(std::string_view field);
long long parse_int(std::string_view field);

// Opens a file for writing with LF line endings; throws io error on failure.
std::ofstream open_out(const std::filesystem::path& path);
std::ifstream open_in(const std::filesystem::path& path);

}  // namespace groundbridge::csv
