#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace reflexq::text {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Strict parse of a whole token; throws InputError naming `what` on failure.
double parse_double(std::string_view token, std::string_view what);
long long parse_int(std::string_view token, std::string_view what);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace reflexq::text
