#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace asyt::text {

// Lowercases ASCII letters and strips surrounding whitespace. Returns nullopt
// when the result is empty or still contains whitespace.
std::optional<std::string> normalize_tag(std::string_view raw);

std::string_view trim(std::string_view s) noexcept;

// Splits on a single delimiter, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char delim);

// Number of Unicode scalar values in a UTF-8 string (continuation bytes are
// not counted).
std::size_t scalar_count(std::string_view utf8) noexcept;

// Byte length of the first `n` scalars (or the whole string when shorter).
std::size_t scalar_prefix_bytes(std::string_view utf8, std::size_t n) noexcept;

// Byte length of the last scalar of a non-empty string.
std::size_t last_scalar_bytes(std::string_view utf8) noexcept;

// Splits a UTF-8 string into its scalars, each as its own byte string.
std::vector<std::string> scalars(std::string_view utf8);

inline bool is_continuation(unsigned char c) noexcept { return (c & 0xC0) == 0x80; }

inline bool starts_with(std::string_view s, std::string_view prefix) noexcept {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace asyt::text
