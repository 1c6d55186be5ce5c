#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "glyphplan/alphabet.hpp"
#include "glyphplan/backend.hpp"
#include "glyphplan/error.hpp"
#include "glyphplan/layout.hpp"
#include "glyphplan/planner.hpp"

namespace glyphplan {

struct Regenerate {
  std::optional<std::uint64_t> seed;  // unset: previous seed + 1
  friend bool operator==(const Regenerate&, const Regenerate&) = default;
};
struct AddText {
  std::string content;
  std::optional<BoxLTRB> box;
  friend bool operator==(const AddText&, const AddText&) = default;
};
struct RemoveText {
  std::size_t index = 0;
  friend bool operator==(const RemoveText&, const RemoveText&) = default;
};
struct MoveBox {
  std::size_t index = 0;
  int dx = 0;
  int dy = 0;
  friend bool operator==(const MoveBox&, const MoveBox&) = default;
};
struct ResizeBox {
  std::size_t index = 0;
  BoxLTRB box;
  friend bool operator==(const ResizeBox&, const ResizeBox&) = default;
};
struct SetText {
  std::size_t index = 0;
  std::string content;
  friend bool operator==(const SetText&, const SetText&) = default;
};

using EditCommand = std::variant<Regenerate, AddText, RemoveText, MoveBox, ResizeBox, SetText>;

struct UndoCommand {
  friend bool operator==(const UndoCommand&, const UndoCommand&) = default;
};

using SessionCommand = std::variant<EditCommand, UndoCommand>;

// ---------------------------------------------------------------------------
// Command grammar
//
//   regenerate [seed] | add "<text>" [l,t,r,b] | remove <i> | move <i> <dx> <dy>
//   | move <i> (left|right|up|down) <n> | resize <i> l,t,r,b | settext <i> "<text>" | undo
//
// Quoted text may escape '"' and '\' with a backslash.

namespace detail {

struct CommandLexer {
  std::string_view text;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw error(errc::invalid_command, what + " at column " + std::to_string(pos), pos);
  }

  void skip_space() {
    while (pos < text.size() && alphabet::is_space(text[pos])) ++pos;
  }

  bool at_end() {
    skip_space();
    return pos >= text.size();
  }

  std::string_view word() {
    skip_space();
    const std::size_t start = pos;
    while (pos < text.size() && !alphabet::is_space(text[pos])) ++pos;
    if (start == pos) fail("expected an argument");
    return text.substr(start, pos - start);
  }

  std::string quoted() {
    skip_space();
    if (pos >= text.size() || text[pos] != '"') fail("expected a quoted string");
    ++pos;
    std::string out;
    while (pos < text.size() && text[pos] != '"') {
      if (text[pos] == '\\' && pos + 1 < text.size()) ++pos;
      out.push_back(text[pos++]);
    }
    if (pos >= text.size()) fail("unterminated quoted string");
    ++pos;
    return out;
  }

  template <typename T>
  T integer(std::string_view what) {
    const auto w = word();
    T value{};
    const char* first = w.data() + (w.front() == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(first, w.data() + w.size(), value);
    if (ec != std::errc{} || ptr != w.data() + w.size()) fail("expected " + std::string(what));
    return value;
  }

  BoxLTRB box() {
    auto w = word();
    if (w.size() >= 2 && w.front() == '[' && w.back() == ']') w = w.substr(1, w.size() - 2);
    int v[4] = {};
    std::size_t i = 0;
    std::size_t start = 0;
    for (std::size_t k = 0; k <= w.size(); ++k) {
      if (k == w.size() || w[k] == ',') {
        if (i >= 4) fail("box needs exactly 4 integers");
        auto [ptr, ec] = std::from_chars(w.data() + start, w.data() + k, v[i]);
        if (ec != std::errc{} || ptr != w.data() + k) fail("bad box integer");
        ++i;
        start = k + 1;
      }
    }
    if (i != 4) fail("box needs exactly 4 integers");
    return {v[0], v[1], v[2], v[3]};
  }
};

}  // namespace detail

inline SessionCommand parse_command(std::string_view text) {
  detail::CommandLexer lex{text};
  const auto verb = lex.word();
  SessionCommand out;
  if (verb == "undo") {
    out = UndoCommand{};
  } else if (verb == "regenerate") {
    Regenerate cmd;
    if (!lex.at_end()) cmd.seed = lex.integer<std::uint64_t>("a seed");
    out = EditCommand{cmd};
  } else if (verb == "add") {
    AddText cmd{lex.quoted(), std::nullopt};
    if (!lex.at_end()) cmd.box = lex.box();
    out = EditCommand{std::move(cmd)};
  } else if (verb == "remove") {
    out = EditCommand{RemoveText{lex.integer<std::size_t>("a line index")}};
  } else if (verb == "move") {
    MoveBox cmd;
    cmd.index = lex.integer<std::size_t>("a line index");
    const auto save = lex.pos;
    const auto direction = lex.word();
    if (direction == "right" || direction == "left" || direction == "up" || direction == "down") {
      const int n = lex.integer<int>("a distance");
      const int sign = (direction == "right" || direction == "down") ? 1 : -1;
      (direction == "right" || direction == "left" ? cmd.dx : cmd.dy) = sign * n;
    } else {
      lex.pos = save;
      cmd.dx = lex.integer<int>("dx");
      cmd.dy = lex.integer<int>("dy");
    }
    out = EditCommand{cmd};
  } else if (verb == "resize") {
    ResizeBox cmd;
    cmd.index = lex.integer<std::size_t>("a line index");
    cmd.box = lex.box();
    out = EditCommand{cmd};
  } else if (verb == "settext") {
    SetText cmd;
    cmd.index = lex.integer<std::size_t>("a line index");
    cmd.content = lex.quoted();
    out = EditCommand{std::move(cmd)};
  } else {
    lex.pos = 0;
    lex.fail("unknown command '" + std::string(verb) + "'");
  }
  if (!lex.at_end()) lex.fail("unexpected trailing input");
  return out;
}

namespace detail {

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string box_text(const BoxLTRB& b) {
  return std::to_string(b.left) + "," + std::to_string(b.top) + "," + std::to_string(b.right) + "," +
         std::to_string(b.bottom);
}

}  // namespace detail

inline std::string format_command(const EditCommand& command) {
  return std::visit(
      [](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Regenerate>) {
          return c.seed ? "regenerate " + std::to_string(*c.seed) : "regenerate";
        } else if constexpr (std::is_same_v<T, AddText>) {
          return "add " + detail::quote(c.content) + (c.box ? " " + detail::box_text(*c.box) : "");
        } else if constexpr (std::is_same_v<T, RemoveText>) {
          return "remove " + std::to_string(c.index);
        } else if constexpr (std::is_same_v<T, MoveBox>) {
          return "move " + std::to_string(c.index) + " " + std::to_string(c.dx) + " " + std::to_string(c.dy);
        } else if constexpr (std::is_same_v<T, ResizeBox>) {
          return "resize " + std::to_string(c.index) + " " + detail::box_text(c.box);
        } else {
          return "settext " + std::to_string(c.index) + " " + detail::quote(c.content);
        }
      },
      command);
}

inline std::string format_command(const SessionCommand& command) {
  if (std::holds_alternative<UndoCommand>(command)) return "undo";
  return format_command(std::get<EditCommand>(command));
}

// ---------------------------------------------------------------------------
// Session

/// Heuristic planning unless a backend is configured.
struct PlannerChoice {
  std::optional<BackendConfig> backend;
};

struct HistoryEntry {
  EditCommand command;
  Layout layout;
};

struct Session {
  std::string id;
  PlanRequest request;
  PlannerChoice planner;
  Canvas canvas;
  std::vector<HistoryEntry> history;  // entry 0 is the initial plan

  const Layout& current() const { return history.back().layout; }
};

inline std::string new_session_id() {
  static constexpr char hex[] = "0123456789abcdef";
  std::random_device rd;
  std::string id;
  for (int i = 0; i < 4; ++i) {
    auto word = rd();
    for (int k = 0; k < 8; ++k, word >>= 4) id.push_back(hex[word & 0xF]);
  }
  return id;
}

inline Layout run_planner(const PlanRequest& request, const PlannerChoice& planner, const Canvas& canvas) {
  if (planner.backend) return plan_via_backend(request, *planner.backend, canvas).layout;
  return plan_layout(request, canvas);
}

inline Session create_session(const PlanRequest& request, PlannerChoice planner = {},
                              const Canvas& canvas = {}, std::string id = new_session_id()) {
  Session session{std::move(id), request, std::move(planner), canvas, {}};
  auto layout = run_planner(request, session.planner, canvas);
  session.history.push_back({Regenerate{request.seed}, std::move(layout)});
  return session;
}

namespace detail {

inline std::string checked_content(std::string_view raw) {
  auto content = alphabet::canonicalize(raw);
  if (content.empty()) throw error(errc::empty_content, "text is empty");
  if (auto pos = alphabet::first_foreign(content)) {
    throw error(errc::invalid_content, "non-alphabet symbol at position " + std::to_string(*pos), *pos);
  }
  return content;
}

inline void check_rect(const BoxLTRB& box, const Canvas& canvas) {
  const auto violations = box_violations(box, canvas, 0);
  for (const auto& v : violations) {
    if (v.severity == Severity::error) throw error(errc::invalid_box, "invalid box: " + v.message);
  }
}

inline void check_index(std::size_t index, const Layout& layout) {
  if (index >= layout.lines.size()) {
    throw error(errc::index_out_of_range, "line " + std::to_string(index) + " does not exist (layout has " +
                                              std::to_string(layout.lines.size()) + " lines)",
                index);
  }
}

inline BoxRepr translate(const BoxRepr& box, int dx, int dy) {
  auto shift = [&](Point p) { return Point{p.x + dx, p.y + dy}; };
  return std::visit(
      [&](const auto& b) -> BoxRepr {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, BoxLTRB>) {
          return BoxLTRB{b.left + dx, b.top + dy, b.right + dx, b.bottom + dy};
        } else if constexpr (std::is_same_v<T, CenterPoint> || std::is_same_v<T, TopLeftPoint>) {
          return T{shift(b.at)};
        } else if constexpr (std::is_same_v<T, AngledBox>) {
          return AngledBox{{b.rect.left + dx, b.rect.top + dy, b.rect.right + dx, b.rect.bottom + dy}, b.angle};
        } else {
          QuadBox q = b;
          for (auto& v : q.vertices) v = shift(v);
          return q;
        }
      },
      box);
}

/// Offset actually applied along one axis: the requested shift, reduced so
/// the extent [lo, hi] stays on the canvas. An extent wider than the canvas
/// is pinned to [0, side].
constexpr int clamp_shift(int lo, int hi, int delta, int side) noexcept {
  if (hi - lo >= side) return -lo;
  const long long wanted = static_cast<long long>(lo) + delta;
  const long long limited = std::clamp<long long>(wanted, 0, side - (hi - lo));
  return static_cast<int>(limited - lo);
}

inline BoxRepr resized(const BoxRepr& box, const BoxLTRB& rect) {
  switch (repr_of(box)) {
    case ReprVariant::ltrb_angle: return AngledBox{rect, std::get<AngledBox>(box).angle};
    case ReprVariant::quad: return quad_from_rect(rect);
    case ReprVariant::center: return CenterPoint{rect_center(rect)};
    case ReprVariant::top_left: return TopLeftPoint{{rect.left, rect.top}};
    case ReprVariant::ltrb: break;
  }
  return rect;
}

inline std::uint64_t last_seed(const Session& session) {
  for (auto it = session.history.rbegin(); it != session.history.rend(); ++it) {
    if (const auto* r = std::get_if<Regenerate>(&it->command); r && r->seed) return *r->seed;
  }
  return session.request.seed;
}

}  // namespace detail

/// Applies one command and returns the resulting session state. The recorded
/// command is normalized (a regenerate without a seed records the seed used).
inline Session apply_edit(Session session, const EditCommand& command) {
  const Layout& before = session.current();
  const Canvas canvas = before.canvas;
  Layout next = before;
  EditCommand recorded = command;

  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Regenerate>) {
          const std::uint64_t seed = c.seed ? *c.seed : detail::last_seed(session) + 1;
          PlanRequest request = session.request;
          request.seed = seed;
          next = run_planner(request, session.planner, canvas);
          recorded = Regenerate{seed};
        } else if constexpr (std::is_same_v<T, AddText>) {
          auto content = detail::checked_content(c.content);
          BoxLTRB box;
          if (c.box) {
            detail::check_rect(*c.box, canvas);
            box = *c.box;
          } else {
            box = insert_row_box(before, content);
          }
          next.lines.push_back({std::move(content), box});
        } else if constexpr (std::is_same_v<T, RemoveText>) {
          detail::check_index(c.index, before);
          next.lines.erase(next.lines.begin() + static_cast<std::ptrdiff_t>(c.index));
        } else if constexpr (std::is_same_v<T, MoveBox>) {
          detail::check_index(c.index, before);
          const auto& box = before.lines[c.index].box;
          const auto rect = bounding_rect(box);
          const int dx = detail::clamp_shift(rect.left, rect.right, c.dx, canvas.side);
          const int dy = detail::clamp_shift(rect.top, rect.bottom, c.dy, canvas.side);
          next.lines[c.index].box = detail::translate(box, dx, dy);
        } else if constexpr (std::is_same_v<T, ResizeBox>) {
          detail::check_index(c.index, before);
          detail::check_rect(c.box, canvas);
          next.lines[c.index].box = detail::resized(before.lines[c.index].box, c.box);
        } else {
          detail::check_index(c.index, before);
          next.lines[c.index].content = detail::checked_content(c.content);
        }
      },
      command);

  const auto validation = validate_layout(next);
  if (!validation.ok()) {
    for (const auto& v : validation.violations) {
      if (v.severity == Severity::error) throw error(errc::invalid_box, "edit would produce an invalid layout: " + v.message);
    }
  }
  session.history.push_back({std::move(recorded), std::move(next)});
  return session;
}

inline Session undo(Session session) {
  if (session.history.size() < 2) throw error(errc::nothing_to_undo, "nothing to undo");
  session.history.pop_back();
  return session;
}

inline Session apply_command(Session session, const SessionCommand& command) {
  if (std::holds_alternative<UndoCommand>(command)) return undo(std::move(session));
  return apply_edit(std::move(session), std::get<EditCommand>(command));
}

}  // namespace glyphplan
