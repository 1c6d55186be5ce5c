#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace glyphplan::alphabet {

// Printable ASCII: 26 upper, 26 lower, 10 digits, 32 punctuation marks, space.
inline constexpr unsigned char first = 32;
inline constexpr unsigned char last = 126;
inline constexpr std::size_t size = last - first + 1;

static_assert(size == 95);

constexpr bool contains(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return u >= first && u <= last;
}

constexpr std::size_t ordinal(char c) noexcept {
  return static_cast<unsigned char>(c) - first;
}

constexpr char symbol(std::size_t ordinal) noexcept {
  return static_cast<char>(first + ordinal);
}

/// Byte position of the first symbol outside the alphabet, if any.
constexpr std::optional<std::size_t> first_foreign(std::string_view text) noexcept {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!contains(text[i])) return i;
  }
  return std::nullopt;
}

constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view text) noexcept {
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

/// Canonical form of line content: surrounding whitespace removed.
inline std::string canonicalize(std::string_view text) {
  return std::string(trim(text));
}

}  // namespace glyphplan::alphabet
