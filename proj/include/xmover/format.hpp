#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace xmover {

// Shortest decimal form that parses back to the identical double.
std::string format_exact(double value);

// Six significant digits with trailing zeros kept ("0.450000").
std::string format_sig6(double value);

// Strict parse of a full field as a finite double; throws InvalidArgument.
double parse_double(std::string_view text);

// Strict parse of a non-negative integer field.
unsigned long long parse_uint(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);

// Splits on runs of ASCII whitespace; empty fields are dropped.
std::vector<std::string_view> split_ws(std::string_view text);

std::string_view trim_eol(std::string_view line);

// Open a file or throw IoError naming the path.
std::ifstream open_input(const std::string& path);
std::ofstream open_output(const std::string& path);

// Writes `content` to `path` in one shot (binary mode, so bytes are exact).
void write_file(const std::string& path, const std::string& content);

}  // namespace xmover
