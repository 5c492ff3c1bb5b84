#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vnna::text {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

// Fixed report formatting: 6 significant digits ("%.6g").
std::string format_sig6(double v);

// Strict double parse; the whole string must be consumed.
bool try_parse_double(std::string_view s, double& out);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Percent-encoding for store values: '%', space, '=', CR and LF are escaped
// so one record always fits one line of space-separated key=value tokens.
std::string kv_escape(std::string_view s);
std::string kv_unescape(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// File-name-safe form of an arbitrary identifier ([A-Za-z0-9._-], rest '_').
std::string sanitize_name(std::string_view s);

}  // namespace vnna::text
