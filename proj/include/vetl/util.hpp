#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vetl {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Collapses runs of ASCII whitespace into one space and trims the ends.
std::string collapse_whitespace(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

// Case-insensitive (ASCII) search; returns npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0);
std::size_t irfind(std::string_view haystack, std::string_view needle);

std::vector<std::string> split(std::string_view s, char sep);

bool starts_with_icase(std::string_view s, std::string_view prefix);

// Replaces every "{name}" occurrence.
std::string replace_all(std::string s, std::string_view from, std::string_view to);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string sha256_hex(std::string_view data);
inline std::string sha256_hex(std::span<const std::uint8_t> data) {
  return sha256_hex(std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
}

bool is_valid_utf8(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace vetl
