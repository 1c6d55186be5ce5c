#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "glyphplan/alphabet.hpp"
#include "glyphplan/error.hpp"
#include "glyphplan/layout.hpp"

namespace glyphplan {

struct PlanRequest {
  std::string prompt;
  std::optional<std::vector<std::string>> keywords;
  std::uint64_t seed = 0;

  friend bool operator==(const PlanRequest&, const PlanRequest&) = default;
};

inline void validate_request(const PlanRequest& request) {
  if (alphabet::trim(request.prompt).empty()) throw error(errc::invalid_request, "prompt is empty");
  if (request.keywords) {
    for (std::size_t i = 0; i < request.keywords->size(); ++i) {
      if (alphabet::trim((*request.keywords)[i]).empty()) {
        throw error(errc::invalid_request, "keyword " + std::to_string(i) + " is empty", i);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Keyword extraction

namespace detail {

constexpr bool is_alnum(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

struct QuoteStyle {
  std::string_view open;
  std::string_view close;
  bool word_bounded;  // apostrophes inside words are not quotes
};

inline constexpr QuoteStyle quote_styles[] = {
    {"\"", "\"", false},
    {"\xE2\x80\x9C", "\xE2\x80\x9D", false},  // curly double
    {"\xE2\x80\x98", "\xE2\x80\x99", true},   // curly single
    {"'", "'", true},
};

inline std::vector<std::string> quoted_spans(std::string_view prompt) {
  std::vector<std::string> spans;
  std::size_t i = 0;
  while (i < prompt.size()) {
    bool matched = false;
    for (const auto& q : quote_styles) {
      if (prompt.substr(i).starts_with(q.open)) {
        if (q.word_bounded && i > 0 && is_alnum(prompt[i - 1])) continue;
        const std::size_t body = i + q.open.size();
        std::size_t close = body;
        while ((close = prompt.find(q.close, close)) != std::string_view::npos) {
          const std::size_t after = close + q.close.size();
          if (!q.word_bounded || after >= prompt.size() || !is_alnum(prompt[after])) break;
          ++close;
        }
        if (close == std::string_view::npos) continue;
        const auto span = alphabet::trim(prompt.substr(body, close - body));
        if (!span.empty()) spans.emplace_back(span);
        i = close + q.close.size();
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return spans;
}

inline bool is_caps_word(std::string_view w) noexcept {
  if (w.size() < 2) return false;
  bool letter = false;
  for (char c : w) {
    if (c >= 'A' && c <= 'Z') {
      letter = true;
    } else if (!((c >= '0' && c <= '9') || c == '-' || c == '&' || c == '\'')) {
      return false;
    }
  }
  return letter;
}

inline std::vector<std::string> caps_runs(std::string_view prompt) {
  static constexpr std::string_view edge_punct = ".,;:!?()[]{}";
  std::vector<std::string> runs;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) runs.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < prompt.size()) {
    while (i < prompt.size() && alphabet::is_space(prompt[i])) ++i;
    std::size_t j = i;
    while (j < prompt.size() && !alphabet::is_space(prompt[j])) ++j;
    if (j == i) break;
    std::string_view word = prompt.substr(i, j - i);
    i = j;
    while (!word.empty() && edge_punct.find(word.front()) != std::string_view::npos) word.remove_prefix(1);
    bool trailing = false;
    while (!word.empty() && edge_punct.find(word.back()) != std::string_view::npos) {
      word.remove_suffix(1);
      trailing = true;
    }
    if (is_caps_word(word)) {
      if (!current.empty()) current.push_back(' ');
      current += word;
      if (trailing) flush();
    } else {
      flush();
    }
  }
  flush();
  return runs;
}

}  // namespace detail

/// Quoted spans in order; failing that, runs of ALL-CAPS words of two or
/// more characters; failing that, nothing.
inline std::vector<std::string> extract_keywords(std::string_view prompt) {
  auto quoted = detail::quoted_spans(prompt);
  if (!quoted.empty()) return quoted;
  return detail::caps_runs(prompt);
}

// ---------------------------------------------------------------------------
// Heuristic layout

namespace detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Keywords the heuristic will lay out: the request's own (trimmed, must be
/// alphabet-only) or those extracted from the prompt with foreign symbols
/// dropped.
inline std::vector<std::string> planning_keywords(const PlanRequest& request) {
  std::vector<std::string> out;
  if (request.keywords) {
    for (std::size_t i = 0; i < request.keywords->size(); ++i) {
      auto k = alphabet::canonicalize((*request.keywords)[i]);
      if (auto pos = alphabet::first_foreign(k)) {
        throw error(errc::invalid_request, "keyword " + std::to_string(i) +
                                               " has a non-alphabet symbol at position " +
                                               std::to_string(*pos), i);
      }
      out.push_back(std::move(k));
    }
    return out;
  }
  for (const auto& raw : extract_keywords(request.prompt)) {
    std::string kept;
    for (char c : raw) {
      if (alphabet::contains(c)) kept.push_back(c);
    }
    kept = alphabet::canonicalize(kept);
    if (!kept.empty()) out.push_back(std::move(kept));
  }
  return out;
}

constexpr int row_height(int side, std::size_t rows) noexcept {
  const int denom = 2 * static_cast<int>(std::max<std::size_t>(rows, 2));
  return std::max(1, side / denom);
}

/// Width for `length` symbols at row height `h`, capped at 90% of the
/// canvas, with parity matching the canvas so the box centres exactly.
constexpr int row_width(int side, int h, std::size_t length) noexcept {
  const int char_width = std::max(1, (3 * h + 4) / 5);
  const long long raw = static_cast<long long>(length) * char_width;
  int w = static_cast<int>(std::min<long long>(raw, side * 9LL / 10));
  w = std::max(w, 1);
  if ((side - w) % 2 != 0) w += (w > 1 ? -1 : 1);
  return std::min(w, side);
}

inline BoxLTRB centered_row(int side, int top, int h, std::size_t length) noexcept {
  const int w = row_width(side, h, length);
  const int left = (side - w) / 2;
  return {left, top, left + w, top + h};
}

}  // namespace detail

/// Rows the heuristic can stack on a canvas.
constexpr std::size_t row_capacity(const Canvas& canvas) noexcept {
  return canvas.side > 0 ? static_cast<std::size_t>(canvas.side / 6) : 0;
}

/// Deterministic stand-in for a fine-tuned planner: one horizontally centred
/// row per keyword, stacked top to bottom with at least two grid units
/// between rows. The seed only perturbs spacing and vertical offset.
inline Layout plan_layout(const PlanRequest& request, const Canvas& canvas = {}) {
  validate_request(request);
  if (canvas.side <= 0) throw error(errc::invalid_argument, "canvas side must be positive");
  const auto keywords = detail::planning_keywords(request);
  Layout layout;
  layout.canvas = canvas;
  const std::size_t n = keywords.size();
  if (n == 0) return layout;
  if (n > row_capacity(canvas)) {
    throw error(errc::layout_infeasible, std::to_string(n) + " rows exceed the capacity of " +
                                             std::to_string(row_capacity(canvas)));
  }

  const int side = canvas.side;
  const int h = detail::row_height(side, n);
  const int rows = static_cast<int>(n);
  const int min_total = rows * h + (rows - 1) * 2;
  if (min_total > side) throw error(errc::layout_infeasible, "rows do not fit vertically");

  std::uint64_t state = detail::fnv1a(request.prompt, request.seed ^ 0x9e3779b97f4a7c15ULL);
  for (const auto& k : keywords) state = detail::fnv1a(k, state);
  std::mt19937_64 rng(state);

  int gap = 2;
  if (rows > 1) {
    const int slack_per_gap = (side - min_total) / (rows - 1);
    const int extra = h / 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(h / 2 + 1));
    gap += std::min(extra, slack_per_gap / 2);
  }
  const int total = rows * h + (rows - 1) * gap;
  const int remaining = side - total;
  int top = remaining / 2;
  if (remaining >= 4) {
    const int span = remaining / 4;
    top += static_cast<int>(rng() % static_cast<std::uint64_t>(2 * span + 1)) - span;
  }
  top = std::clamp(top, 0, remaining);

  for (std::size_t i = 0; i < n; ++i) {
    const int row_top = top + static_cast<int>(i) * (h + gap);
    layout.lines.push_back({keywords[i], detail::centered_row(side, row_top, h, keywords[i].size())});
  }
  return layout;
}

/// Places `content` in a new centred row two grid units below every existing
/// box, sized as the heuristic would size a layout of one more row. The row
/// shrinks to whatever height is left below when that is less.
inline BoxLTRB insert_row_box(const Layout& layout, std::string_view content) {
  const int side = layout.canvas.side;
  int h = detail::row_height(side, layout.lines.size() + 1);
  int top = (side - h) / 2;
  if (!layout.lines.empty()) {
    int lowest = 0;
    for (const auto& line : layout.lines) lowest = std::max(lowest, bounding_rect(line.box).bottom);
    top = lowest + 2;
    h = std::min(h, side - top);
  }
  if (h < 1) throw error(errc::layout_infeasible, "no room for another row below the layout");
  return detail::centered_row(side, top, h, content.size());
}

}  // namespace glyphplan
