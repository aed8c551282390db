#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace longwrite {

/// ASCII whitespace as understood by the word counter and the chunker.
constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

/// Number of maximal runs of non-whitespace characters.
std::size_t count_words(std::string_view text) noexcept;

std::string_view trim(std::string_view text) noexcept;
std::string to_lower(std::string_view text);
bool starts_with_ci(std::string_view text, std::string_view prefix) noexcept;

std::string join(const std::vector<std::string>& parts, std::string_view separator);

/// 64-bit FNV-1a. Stable across platforms, used for content-addressed seeds and
/// transcript request keys.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;
std::string hex64(std::uint64_t value);

/// Rough token estimate (four bytes per token) used for context budgeting.
std::size_t estimate_tokens(std::string_view text) noexcept;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

/// Splits one CSV record (no embedded newlines) into fields.
std::vector<std::string> csv_split(std::string_view line);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace longwrite
