#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glyphplan/alphabet.hpp"
#include "glyphplan/error.hpp"
#include "glyphplan/layout.hpp"

namespace glyphplan {

/// Version tag of the text serializer; bump on any change to the line format.
inline constexpr std::string_view serializer_version = "textline-v1";

/// Task description sent ahead of every planning prompt. Must stay
/// byte-identical to resources/task_description_v1.txt.
inline constexpr std::string_view task_description_v1 =
    "Given a prompt that will be used to generate an image, plan the layout of visual text "
    "for the image. The size of the image is 128x128. Therefore, none of the properties of "
    "the positions should exceed 128, including the coordinates of the top, left, right, and "
    "bottom. You don\xE2\x80\x99t need to specify the details of font styles. At each line, "
    "the format should be textline left, top, right, and bottom. So let us begin.";

// ---------------------------------------------------------------------------
// Serializer

namespace detail {

inline void append_ints(std::string& out, std::initializer_list<int> values) {
  bool first = true;
  for (int v : values) {
    if (!first) out.push_back(',');
    out += std::to_string(v);
    first = false;
  }
}

inline void append_group(std::string& out, const BoxRepr& box) {
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, BoxLTRB>) {
          append_ints(out, {b.left, b.top, b.right, b.bottom});
        } else if constexpr (std::is_same_v<T, CenterPoint> || std::is_same_v<T, TopLeftPoint>) {
          append_ints(out, {b.at.x, b.at.y});
        } else if constexpr (std::is_same_v<T, AngledBox>) {
          append_ints(out, {b.rect.left, b.rect.top, b.rect.right, b.rect.bottom, b.angle});
        } else {
          const auto& v = b.vertices;
          append_ints(out, {v[0].x, v[0].y, v[1].x, v[1].y, v[2].x, v[2].y, v[3].x, v[3].y});
        }
      },
      box);
}

}  // namespace detail

/// One line per text line: content, a space, then the comma-separated
/// coordinate group of `variant`. No trailing newline.
inline std::string serialize_layout(const Layout& layout, ReprVariant variant) {
  std::string out;
  for (std::size_t i = 0; i < layout.lines.size(); ++i) {
    const auto& line = layout.lines[i];
    if (alphabet::trim(line.content).empty()) {
      throw error(errc::empty_content, "empty content at line " + std::to_string(i), i);
    }
    if (line.content.find_first_of("\r\n") != std::string::npos) {
      throw error(errc::invalid_content, "content contains a line break at line " + std::to_string(i), i);
    }
    if (i > 0) out.push_back('\n');
    out += line.content;
    out.push_back(' ');
    detail::append_group(out, convert_box(line.box, variant));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser

enum class ParseMode { lenient, strict };

struct ParseWarning {
  std::size_t line = 0;
  std::string message;

  friend bool operator==(const ParseWarning&, const ParseWarning&) = default;
};

struct ParseResult {
  Layout layout;
  std::vector<ParseWarning> warnings;
};

namespace detail {

constexpr bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

struct LineFailure {
  errc code;
  std::string reason;
};

struct GroupScan {
  std::vector<long long> values;  // in source order
  std::size_t start = 0;          // byte offset of the first integer
};

// Collects the maximal run of comma-separated integers anchored at the end of
// `s`. Separators may carry surrounding whitespace.
inline GroupScan scan_trailing_group(std::string_view s, std::optional<LineFailure>& failure) {
  GroupScan scan;
  std::vector<long long> reversed;
  std::size_t end = s.size();
  while (true) {
    std::size_t begin = end;
    while (begin > 0 && is_digit(s[begin - 1])) --begin;
    if (begin == end) break;
    if (begin > 0 && (s[begin - 1] == '-' || s[begin - 1] == '+')) --begin;
    const char* first = s.data() + begin + (s[begin] == '+' ? 1 : 0);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(first, s.data() + end, value);
    if (ec != std::errc{} || ptr != s.data() + end || end - begin > 10) {
      failure = LineFailure{errc::malformed_line, "integer out of range"};
      return scan;
    }
    reversed.push_back(value);
    scan.start = begin;

    std::size_t k = begin;
    while (k > 0 && alphabet::is_space(s[k - 1])) --k;
    if (k == 0 || s[k - 1] != ',') break;
    std::size_t before_comma = k - 1;
    while (before_comma > 0 && alphabet::is_space(s[before_comma - 1])) --before_comma;
    if (before_comma == 0 || !is_digit(s[before_comma - 1])) break;
    end = before_comma;
  }
  scan.values.assign(reversed.rbegin(), reversed.rend());
  return scan;
}

inline int clamp_coordinate(long long v, int side, std::size_t line,
                            std::vector<ParseWarning>& warnings) {
  if (v < 0 || v > side) {
    const long long c = v < 0 ? 0 : side;
    warnings.push_back({line, "coordinate " + std::to_string(v) + " clamped to " + std::to_string(c)});
    return static_cast<int>(c);
  }
  return static_cast<int>(v);
}

inline BoxLTRB make_rect(const std::vector<long long>& v, int side, std::size_t line,
                         std::vector<ParseWarning>& warnings) {
  BoxLTRB r{clamp_coordinate(v[0], side, line, warnings), clamp_coordinate(v[1], side, line, warnings),
            clamp_coordinate(v[2], side, line, warnings), clamp_coordinate(v[3], side, line, warnings)};
  if (r.left > r.right) {
    std::swap(r.left, r.right);
    warnings.push_back({line, "left > right; swapped"});
  }
  if (r.top > r.bottom) {
    std::swap(r.top, r.bottom);
    warnings.push_back({line, "top > bottom; swapped"});
  }
  return r;
}

inline BoxRepr make_box(const std::vector<long long>& v, ReprVariant variant, int side,
                        std::size_t line, std::vector<ParseWarning>& warnings) {
  switch (variant) {
    case ReprVariant::ltrb: return make_rect(v, side, line, warnings);
    case ReprVariant::center:
      return CenterPoint{{clamp_coordinate(v[0], side, line, warnings),
                          clamp_coordinate(v[1], side, line, warnings)}};
    case ReprVariant::top_left:
      return TopLeftPoint{{clamp_coordinate(v[0], side, line, warnings),
                           clamp_coordinate(v[1], side, line, warnings)}};
    case ReprVariant::ltrb_angle:
      return AngledBox{make_rect(v, side, line, warnings), static_cast<int>(v[4])};
    case ReprVariant::quad: {
      QuadBox q;
      for (std::size_t i = 0; i < 4; ++i) {
        q.vertices[i] = {clamp_coordinate(v[2 * i], side, line, warnings),
                         clamp_coordinate(v[2 * i + 1], side, line, warnings)};
      }
      if (signed_area2(q) < 0) {
        std::swap(q.vertices[1], q.vertices[3]);
        warnings.push_back({line, "quad vertices reordered clockwise"});
      }
      return q;
    }
  }
  return BoxLTRB{};
}

inline std::optional<LineFailure> parse_line(std::string_view raw, std::size_t index,
                                             ReprVariant variant, const Canvas& canvas,
                                             Layout& layout, std::vector<ParseWarning>& warnings) {
  const std::string_view s = alphabet::trim(raw);
  const std::size_t arity = coordinate_arity(variant);
  std::optional<LineFailure> failure;
  auto scan = scan_trailing_group(s, failure);
  if (failure) return failure;
  if (scan.values.size() != arity) {
    return LineFailure{errc::malformed_line, "expected " + std::to_string(arity) +
                                                 " coordinates, found " +
                                                 std::to_string(scan.values.size())};
  }
  if (scan.start == 0) return LineFailure{errc::malformed_line, "empty content"};
  if (!alphabet::is_space(s[scan.start - 1])) {
    return LineFailure{errc::malformed_line, "coordinate group must follow whitespace"};
  }
  const std::string_view content = alphabet::trim(s.substr(0, scan.start));
  if (content.empty()) return LineFailure{errc::malformed_line, "empty content"};
  if (auto pos = alphabet::first_foreign(content)) {
    return LineFailure{errc::malformed_line, "non-alphabet symbol at position " + std::to_string(*pos)};
  }
  if (variant == ReprVariant::ltrb_angle && (scan.values[4] < min_angle || scan.values[4] > max_angle)) {
    return LineFailure{errc::angle_out_of_range,
                       "angle " + std::to_string(scan.values[4]) + " outside [-90, 90]"};
  }
  std::vector<ParseWarning> local;
  BoxRepr box = make_box(scan.values, variant, canvas.side, index, local);
  layout.lines.push_back({std::string(content), std::move(box)});
  warnings.insert(warnings.end(), local.begin(), local.end());
  return std::nullopt;
}

}  // namespace detail

/// Parses language-format text. Blank lines are skipped. In lenient mode a
/// line that fails to parse becomes a warning; in strict mode it throws.
/// Out-of-range coordinates are clamped and inverted pairs swapped, both with
/// warnings, so the result always validates.
inline ParseResult parse_layout(std::string_view text, ReprVariant variant,
                                const Canvas& canvas = {}, ParseMode mode = ParseMode::lenient) {
  if (canvas.side <= 0) throw error(errc::invalid_argument, "canvas side must be positive");
  ParseResult result;
  result.layout.canvas = canvas;
  std::size_t index = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (!alphabet::trim(raw).empty()) {
      auto failure = detail::parse_line(raw, index, variant, canvas, result.layout, result.warnings);
      if (failure) {
        if (mode == ParseMode::strict) {
          if (failure->code == errc::angle_out_of_range) {
            throw error(errc::angle_out_of_range,
                        "line " + std::to_string(index) + ": " + failure->reason, index);
          }
          throw malformed_line(index, failure->reason);
        }
        result.warnings.push_back({index, failure->reason});
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
    ++index;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Planner prompt

struct PlannerPrompt {
  std::string description{task_description_v1};
  std::string prompt;
  std::optional<std::vector<std::string>> keywords;
};

/// "Prompt: <prompt>" plus " Keywords: k1, k2" when keywords are given.
inline std::string prompt_body(const PlannerPrompt& request) {
  std::string out = "Prompt: " + request.prompt;
  if (request.keywords && !request.keywords->empty()) {
    out += " Keywords: ";
    for (std::size_t i = 0; i < request.keywords->size(); ++i) {
      if (i > 0) out += ", ";
      out += (*request.keywords)[i];
    }
  }
  return out;
}

inline std::string build_planner_prompt(const PlannerPrompt& request) {
  return request.description + " " + prompt_body(request);
}

}  // namespace glyphplan
