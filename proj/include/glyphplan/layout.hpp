#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "glyphplan/alphabet.hpp"
#include "glyphplan/error.hpp"

namespace glyphplan {

inline constexpr int default_canvas_side = 128;

struct Canvas {
  int side = default_canvas_side;

  friend bool operator==(const Canvas&, const Canvas&) = default;
};

struct Point {
  int x = 0;
  int y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct BoxLTRB {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;

  int width() const noexcept { return right - left; }
  int height() const noexcept { return bottom - top; }
  std::int64_t area() const noexcept {
    return static_cast<std::int64_t>(width()) * static_cast<std::int64_t>(height());
  }

  friend bool operator==(const BoxLTRB&, const BoxLTRB&) = default;
};

struct CenterPoint {
  Point at;
  friend bool operator==(const CenterPoint&, const CenterPoint&) = default;
};

struct TopLeftPoint {
  Point at;
  friend bool operator==(const TopLeftPoint&, const TopLeftPoint&) = default;
};

inline constexpr int min_angle = -90;
inline constexpr int max_angle = 90;

struct AngledBox {
  BoxLTRB rect;
  int angle = 0;  // degrees

  friend bool operator==(const AngledBox&, const AngledBox&) = default;
};

/// Four vertices, clockwise on a y-down canvas, starting at the top-left one.
struct QuadBox {
  std::array<Point, 4> vertices{};

  friend bool operator==(const QuadBox&, const QuadBox&) = default;
};

using BoxRepr = std::variant<BoxLTRB, CenterPoint, TopLeftPoint, AngledBox, QuadBox>;

/// Position representation selector; the alternatives of BoxRepr in order.
enum class ReprVariant { ltrb, center, top_left, ltrb_angle, quad };

inline constexpr std::array<ReprVariant, 5> all_repr_variants = {
    ReprVariant::ltrb, ReprVariant::center, ReprVariant::top_left,
    ReprVariant::ltrb_angle, ReprVariant::quad};

constexpr std::string_view repr_name(ReprVariant v) noexcept {
  switch (v) {
    case ReprVariant::ltrb: return "ltrb";
    case ReprVariant::center: return "center";
    case ReprVariant::top_left: return "lt";
    case ReprVariant::ltrb_angle: return "ltrb_angle";
    case ReprVariant::quad: return "quad";
  }
  return "ltrb";
}

inline std::optional<ReprVariant> parse_repr_name(std::string_view name) noexcept {
  for (auto v : all_repr_variants) {
    if (repr_name(v) == name) return v;
  }
  return std::nullopt;
}

/// Number of integers in the coordinate group of one line.
constexpr std::size_t coordinate_arity(ReprVariant v) noexcept {
  switch (v) {
    case ReprVariant::ltrb: return 4;
    case ReprVariant::center: return 2;
    case ReprVariant::top_left: return 2;
    case ReprVariant::ltrb_angle: return 5;
    case ReprVariant::quad: return 8;
  }
  return 4;
}

inline ReprVariant repr_of(const BoxRepr& box) noexcept {
  return static_cast<ReprVariant>(box.index());
}

struct TextLine {
  std::string content;
  BoxRepr box;

  friend bool operator==(const TextLine&, const TextLine&) = default;
};

struct Layout {
  std::vector<TextLine> lines;
  Canvas canvas;

  bool empty() const noexcept { return lines.empty(); }
  std::size_t size() const noexcept { return lines.size(); }

  friend bool operator==(const Layout&, const Layout&) = default;
};

// ---------------------------------------------------------------------------
// Validation

enum class Severity { error, warning };

struct Violation {
  Severity severity = Severity::error;
  std::optional<std::size_t> line;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationResult {
  std::vector<Violation> violations;

  /// True when no error-severity violation was recorded; warnings are allowed.
  bool ok() const noexcept {
    return std::none_of(violations.begin(), violations.end(),
                        [](const Violation& v) { return v.severity == Severity::error; });
  }
};

namespace detail {

inline void check_axis(std::vector<Violation>& out, std::size_t line, int lo, int hi,
                       std::string_view lo_name, std::string_view hi_name, int side) {
  const auto at = " at line " + std::to_string(line);
  if (lo < 0) out.push_back({Severity::error, line, std::string(lo_name) + " is negative" + at});
  if (hi < 0) out.push_back({Severity::error, line, std::string(hi_name) + " is negative" + at});
  if (lo > side) out.push_back({Severity::error, line, std::string(lo_name) + " exceeds canvas" + at});
  if (hi > side) out.push_back({Severity::error, line, std::string(hi_name) + " exceeds canvas" + at});
  if (lo > hi) {
    out.push_back({Severity::error, line,
                   std::string(lo_name) + " > " + std::string(hi_name) + at});
  }
}

inline void check_rect(std::vector<Violation>& out, std::size_t line, const BoxLTRB& b, int side) {
  const auto before = out.size();
  check_axis(out, line, b.left, b.right, "left", "right", side);
  check_axis(out, line, b.top, b.bottom, "top", "bottom", side);
  if (out.size() == before && (b.left == b.right || b.top == b.bottom)) {
    out.push_back({Severity::warning, line, "zero-area box at line " + std::to_string(line)});
  }
}

inline void check_point(std::vector<Violation>& out, std::size_t line, Point p, int side,
                        std::string_view what) {
  if (p.x < 0 || p.x > side || p.y < 0 || p.y > side) {
    out.push_back({Severity::error, line,
                   std::string(what) + " outside canvas at line " + std::to_string(line)});
  }
}

/// Twice the signed area; positive for clockwise order on a y-down canvas.
inline std::int64_t signed_area2(const QuadBox& q) noexcept {
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& a = q.vertices[i];
    const auto& b = q.vertices[(i + 1) % 4];
    sum += static_cast<std::int64_t>(a.x) * b.y - static_cast<std::int64_t>(b.x) * a.y;
  }
  return sum;
}

}  // namespace detail

inline std::vector<Violation> box_violations(const BoxRepr& box, const Canvas& canvas,
                                             std::size_t line) {
  std::vector<Violation> out;
  const int side = canvas.side;
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, BoxLTRB>) {
          detail::check_rect(out, line, b, side);
        } else if constexpr (std::is_same_v<T, CenterPoint>) {
          detail::check_point(out, line, b.at, side, "center");
        } else if constexpr (std::is_same_v<T, TopLeftPoint>) {
          detail::check_point(out, line, b.at, side, "top-left point");
        } else if constexpr (std::is_same_v<T, AngledBox>) {
          detail::check_rect(out, line, b.rect, side);
          if (b.angle < min_angle || b.angle > max_angle) {
            out.push_back({Severity::error, line,
                           "angle outside [-90, 90] at line " + std::to_string(line)});
          }
        } else {
          for (const auto& v : b.vertices) detail::check_point(out, line, v, side, "quad vertex");
          const auto area = detail::signed_area2(b);
          if (area < 0) {
            out.push_back({Severity::error, line,
                           "quad vertices not clockwise at line " + std::to_string(line)});
          } else if (area == 0) {
            out.push_back({Severity::warning, line, "zero-area box at line " + std::to_string(line)});
          }
        }
      },
      box);
  return out;
}

inline std::vector<Violation> content_violations(std::string_view content, std::size_t line) {
  std::vector<Violation> out;
  const auto at = " at line " + std::to_string(line);
  if (content.empty()) {
    out.push_back({Severity::error, line, "empty content" + at});
    return out;
  }
  if (auto pos = alphabet::first_foreign(content)) {
    out.push_back({Severity::error, line,
                   "non-alphabet symbol at position " + std::to_string(*pos) + at});
  }
  if (alphabet::is_space(content.front()) || alphabet::is_space(content.back())) {
    out.push_back({Severity::error, line, "content has surrounding whitespace" + at});
  }
  return out;
}

inline ValidationResult validate_layout(const Layout& layout) {
  ValidationResult result;
  if (layout.canvas.side <= 0) {
    result.violations.push_back({Severity::error, std::nullopt, "canvas side must be positive"});
    return result;
  }
  for (std::size_t i = 0; i < layout.lines.size(); ++i) {
    const auto& line = layout.lines[i];
    for (auto& v : content_violations(line.content, i)) result.violations.push_back(std::move(v));
    for (auto& v : box_violations(line.box, layout.canvas, i)) result.violations.push_back(std::move(v));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Geometry

namespace detail {

inline int scale_half_up(std::int64_t c, std::int64_t from, std::int64_t to) {
  c = std::clamp<std::int64_t>(c, 0, from);
  const auto scaled = (2 * c * to + from) / (2 * from);
  return static_cast<int>(std::clamp<std::int64_t>(scaled, 0, to));
}

}  // namespace detail

/// Maps a box in source pixels onto the grid, scaling each axis by its own
/// source extent. Round-half-up, then clamp to the canvas.
inline BoxLTRB normalize_box(const BoxLTRB& pixel_box, int source_width, int source_height,
                             const Canvas& canvas) {
  if (source_width <= 0 || source_height <= 0) {
    throw error(errc::invalid_argument, "source side must be positive");
  }
  if (canvas.side <= 0) throw error(errc::invalid_argument, "canvas side must be positive");
  BoxLTRB out{detail::scale_half_up(pixel_box.left, source_width, canvas.side),
              detail::scale_half_up(pixel_box.top, source_height, canvas.side),
              detail::scale_half_up(pixel_box.right, source_width, canvas.side),
              detail::scale_half_up(pixel_box.bottom, source_height, canvas.side)};
  if (out.left > out.right) std::swap(out.left, out.right);
  if (out.top > out.bottom) std::swap(out.top, out.bottom);
  return out;
}

inline BoxLTRB normalize_box(const BoxLTRB& pixel_box, int source_side, const Canvas& canvas) {
  return normalize_box(pixel_box, source_side, source_side, canvas);
}

/// Intersection over union of closed rectangles; 0 when the union is empty.
inline double box_iou(const BoxLTRB& a, const BoxLTRB& b) noexcept {
  const std::int64_t iw = std::max(0, std::min(a.right, b.right) - std::max(a.left, b.left));
  const std::int64_t ih = std::max(0, std::min(a.bottom, b.bottom) - std::max(a.top, b.top));
  const std::int64_t inter = iw * ih;
  const std::int64_t uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Axis-aligned rectangle covering any representation. Points collapse to a
/// zero-area rectangle; angled boxes use their unrotated rectangle.
inline BoxLTRB bounding_rect(const BoxRepr& box) noexcept {
  return std::visit(
      [](const auto& b) -> BoxLTRB {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, BoxLTRB>) {
          return b;
        } else if constexpr (std::is_same_v<T, CenterPoint> || std::is_same_v<T, TopLeftPoint>) {
          return {b.at.x, b.at.y, b.at.x, b.at.y};
        } else if constexpr (std::is_same_v<T, AngledBox>) {
          return b.rect;
        } else {
          BoxLTRB r{b.vertices[0].x, b.vertices[0].y, b.vertices[0].x, b.vertices[0].y};
          for (const auto& v : b.vertices) {
            r.left = std::min(r.left, v.x);
            r.top = std::min(r.top, v.y);
            r.right = std::max(r.right, v.x);
            r.bottom = std::max(r.bottom, v.y);
          }
          return r;
        }
      },
      box);
}

/// Largest IoU over all unordered pairs of lines; empty below two lines.
inline std::optional<double> max_pairwise_iou(const Layout& layout) {
  if (layout.lines.size() < 2) return std::nullopt;
  std::vector<BoxLTRB> rects;
  rects.reserve(layout.lines.size());
  for (const auto& line : layout.lines) rects.push_back(bounding_rect(line.box));
  double best = 0.0;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    for (std::size_t j = i + 1; j < rects.size(); ++j) {
      best = std::max(best, box_iou(rects[i], rects[j]));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Representation conversion

inline QuadBox quad_from_rect(const BoxLTRB& r) noexcept {
  return {{Point{r.left, r.top}, Point{r.right, r.top}, Point{r.right, r.bottom},
           Point{r.left, r.bottom}}};
}

inline Point rect_center(const BoxLTRB& r) noexcept {
  // half-up midpoint; coordinates are non-negative on a valid canvas
  return {(r.left + r.right + 1) / 2, (r.top + r.bottom + 1) / 2};
}

/// Converts a box to another representation. Rectangles convert to every
/// variant; angled boxes and quads reduce to rectangles; points convert only
/// to themselves.
inline BoxRepr convert_box(const BoxRepr& box, ReprVariant target) {
  const auto source = repr_of(box);
  if (source == target) return box;
  if (source == ReprVariant::center || source == ReprVariant::top_left) {
    throw error(errc::incompatible_repr, "cannot convert " + std::string(repr_name(source)) +
                                             " box to " + std::string(repr_name(target)));
  }
  const BoxLTRB rect = bounding_rect(box);
  const int angle = source == ReprVariant::ltrb_angle ? std::get<AngledBox>(box).angle : 0;
  switch (target) {
    case ReprVariant::ltrb: return rect;
    case ReprVariant::center: return CenterPoint{rect_center(rect)};
    case ReprVariant::top_left: return TopLeftPoint{{rect.left, rect.top}};
    case ReprVariant::ltrb_angle: return AngledBox{rect, angle};
    case ReprVariant::quad: return quad_from_rect(rect);
  }
  return rect;
}

}  // namespace glyphplan
