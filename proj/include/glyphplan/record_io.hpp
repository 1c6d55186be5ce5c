#pragma once

#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "glyphplan/edit_session.hpp"
#include "glyphplan/error.hpp"
#include "glyphplan/layout.hpp"
#include "glyphplan/tokenizer.hpp"

namespace glyphplan {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Layout records: {prompt, lines: [{text, box}], repr, canvas}

inline json box_to_json(const BoxRepr& box) {
  return std::visit(
      [](const auto& b) -> json {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, BoxLTRB>) {
          return {b.left, b.top, b.right, b.bottom};
        } else if constexpr (std::is_same_v<T, CenterPoint> || std::is_same_v<T, TopLeftPoint>) {
          return {b.at.x, b.at.y};
        } else if constexpr (std::is_same_v<T, AngledBox>) {
          return {b.rect.left, b.rect.top, b.rect.right, b.rect.bottom, b.angle};
        } else {
          json out = json::array();
          for (const auto& v : b.vertices) {
            out.push_back(v.x);
            out.push_back(v.y);
          }
          return out;
        }
      },
      box);
}

inline BoxRepr box_from_json(const json& j, ReprVariant variant) {
  if (!j.is_array()) throw error(errc::invalid_argument, "box must be an array");
  const auto arity = coordinate_arity(variant);
  if (j.size() != arity) {
    throw error(errc::invalid_argument, "box for repr '" + std::string(repr_name(variant)) + "' needs " +
                                            std::to_string(arity) + " integers, found " + std::to_string(j.size()));
  }
  std::vector<int> v;
  for (const auto& e : j) {
    if (!e.is_number_integer()) throw error(errc::invalid_argument, "box entries must be integers");
    v.push_back(e.get<int>());
  }
  return detail::box_from_values(v, variant);
}

inline BoxLTRB rect_from_json(const json& j) { return std::get<BoxLTRB>(box_from_json(j, ReprVariant::ltrb)); }

inline ReprVariant layout_variant(const Layout& layout) {
  return layout.lines.empty() ? ReprVariant::ltrb : repr_of(layout.lines.front().box);
}

inline json layout_to_record(const Layout& layout, std::optional<ReprVariant> variant = std::nullopt,
                             std::optional<std::string> prompt = std::nullopt) {
  const ReprVariant v = variant.value_or(layout_variant(layout));
  json lines = json::array();
  for (const auto& line : layout.lines) {
    lines.push_back({{"text", line.content}, {"box", box_to_json(convert_box(line.box, v))}});
  }
  json out = json::object();
  if (prompt) out["prompt"] = *prompt;
  out["lines"] = std::move(lines);
  out["repr"] = std::string(repr_name(v));
  out["canvas"] = layout.canvas.side;
  return out;
}

namespace detail {

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw error(errc::invalid_argument, std::string("missing field '") + key + "'");
  return j.at(key);
}

inline std::string require_string(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) throw error(errc::invalid_argument, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.is_array()) throw error(errc::invalid_argument, std::string("field '") + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw error(errc::invalid_argument, std::string("field '") + key + "' must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace detail

/// Reads a layout record and checks it validates.
inline Layout layout_from_record(const json& record) {
  if (!record.is_object()) throw error(errc::invalid_argument, "layout record must be an object");
  ReprVariant variant = ReprVariant::ltrb;
  if (record.contains("repr")) {
    const auto& r = record.at("repr");
    auto parsed = r.is_string() ? parse_repr_name(r.get<std::string>()) : std::nullopt;
    if (!parsed) throw error(errc::invalid_argument, "unknown repr " + r.dump());
    variant = *parsed;
  }
  Layout layout;
  if (record.contains("canvas")) {
    if (!record.at("canvas").is_number_integer()) throw error(errc::invalid_argument, "canvas must be an integer");
    layout.canvas.side = record.at("canvas").get<int>();
  }
  const auto& lines = detail::require(record, "lines");
  if (!lines.is_array()) throw error(errc::invalid_argument, "lines must be an array");
  for (const auto& line : lines) {
    layout.lines.push_back({detail::require_string(line, "text"), box_from_json(detail::require(line, "box"), variant)});
  }
  const auto validation = validate_layout(layout);
  if (!validation.ok()) {
    for (const auto& v : validation.violations) {
      if (v.severity == Severity::error) throw error(errc::invalid_argument, "invalid layout: " + v.message, v.line);
    }
  }
  return layout;
}

inline json violations_to_json(const std::vector<Violation>& violations) {
  json out = json::array();
  for (const auto& v : violations) {
    out.push_back({{"severity", v.severity == Severity::error ? "error" : "warning"},
                   {"line", v.line ? json(*v.line) : json(nullptr)},
                   {"message", v.message}});
  }
  return out;
}

inline json warnings_to_json(const std::vector<ParseWarning>& warnings) {
  json out = json::array();
  for (const auto& w : warnings) out.push_back({{"line", w.line}, {"message", w.message}});
  return out;
}

// ---------------------------------------------------------------------------
// Line-delimited files

/// Calls `fn(record, line_number)` for every non-blank line (1-based numbers).
/// Unparsable lines and errors raised by `fn` become dataset_parse_error.
inline std::size_t for_each_record(std::istream& in, const std::function<void(const json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (alphabet::trim(line).empty()) continue;
    auto record = json::parse(line, nullptr, false);
    if (record.is_discarded()) throw error(errc::dataset_parse_error, "line " + std::to_string(line_no) + ": invalid JSON", line_no);
    try {
      fn(record, line_no);
    } catch (const error& e) {
      throw error(errc::dataset_parse_error, "line " + std::to_string(line_no) + ": " + e.what(), line_no);
    } catch (const json::exception& e) {
      throw error(errc::dataset_parse_error, "line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
    ++count;
  }
  return count;
}

inline std::size_t for_each_record(const std::string& path, const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::io_error, "cannot open " + path);
  return for_each_record(in, fn);
}

// ---------------------------------------------------------------------------
// Token sequences: {ids, L, variant, level, prompt_length}

inline json sequence_to_record(const TokenSequence& seq) {
  return {{"ids", seq.ids},
          {"L", seq.max_length},
          {"variant", std::string(repr_name(seq.variant))},
          {"level", std::string(level_name(seq.level))},
          {"prompt_length", seq.prompt_length}};
}

inline TokenSequence sequence_from_record(const json& record, const Vocabulary& vocab) {
  TokenSequence seq;
  const auto& ids = detail::require(record, "ids");
  if (!ids.is_array()) throw error(errc::invalid_argument, "ids must be an array");
  for (const auto& id : ids) {
    if (!id.is_number_integer()) throw error(errc::invalid_argument, "ids must be integers");
    seq.ids.push_back(id.get<int>());
  }
  seq.max_length = record.contains("L") ? record.at("L").get<std::size_t>() : seq.ids.size();
  if (record.contains("variant")) {
    auto v = parse_repr_name(record.at("variant").get<std::string>());
    if (!v) throw error(errc::invalid_argument, "unknown variant");
    seq.variant = *v;
  }
  if (record.contains("level")) {
    auto l = parse_level_name(record.at("level").get<std::string>());
    if (!l) throw error(errc::invalid_argument, "unknown level");
    seq.level = *l;
  }
  if (record.contains("prompt_length")) seq.prompt_length = record.at("prompt_length").get<std::size_t>();
  for (int id : seq.ids) seq.kinds.push_back(vocab.kind_of(id));
  return seq;
}

// ---------------------------------------------------------------------------
// Plan requests and sessions

inline PlanRequest request_from_json(const json& body) {
  PlanRequest request;
  request.prompt = detail::require_string(body, "prompt");
  if (body.contains("keywords") && !body.at("keywords").is_null()) {
    request.keywords = detail::string_list(body.at("keywords"), "keywords");
  }
  if (body.contains("seed") && !body.at("seed").is_null()) {
    if (!body.at("seed").is_number_unsigned()) throw error(errc::invalid_argument, "seed must be a non-negative integer");
    request.seed = body.at("seed").get<std::uint64_t>();
  }
  return request;
}

inline json request_to_json(const PlanRequest& request) {
  json out{{"prompt", request.prompt}, {"seed", request.seed}};
  out["keywords"] = request.keywords ? json(*request.keywords) : json(nullptr);
  return out;
}

inline json backend_to_json(const BackendConfig& config) {
  return {{"url", config.url},
          {"timeout_ms", config.timeout.count()},
          {"retries", config.max_retries},
          {"strict", config.mode == ParseMode::strict}};
}

inline BackendConfig backend_from_json(const json& j) {
  BackendConfig config;
  config.url = detail::require_string(j, "url");
  if (j.contains("timeout_ms")) config.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<long long>());
  if (j.contains("retries")) config.max_retries = j.at("retries").get<int>();
  if (j.contains("strict") && j.at("strict").get<bool>()) config.mode = ParseMode::strict;
  validate_backend_config(config);
  return config;
}

/// Current layout as a layout record, plus identity, request, and history.
inline json session_to_json(const Session& session) {
  json out = layout_to_record(session.current(), std::nullopt, session.request.prompt);
  out["session_id"] = session.id;
  out["request"] = request_to_json(session.request);
  out["backend"] = session.planner.backend ? backend_to_json(*session.planner.backend) : json(nullptr);
  json history = json::array();
  for (const auto& entry : session.history) {
    history.push_back({{"command", format_command(entry.command)}, {"layout", layout_to_record(entry.layout)}});
  }
  out["history"] = std::move(history);
  return out;
}

inline Session session_from_json(const json& j) {
  Session session;
  session.id = detail::require_string(j, "session_id");
  session.request = request_from_json(detail::require(j, "request"));
  if (j.contains("backend") && !j.at("backend").is_null()) session.planner.backend = backend_from_json(j.at("backend"));
  const auto& history = detail::require(j, "history");
  if (!history.is_array() || history.empty()) throw error(errc::invalid_argument, "session history must be a non-empty array");
  for (const auto& entry : history) {
    auto command = parse_command(detail::require_string(entry, "command"));
    if (!std::holds_alternative<EditCommand>(command)) throw error(errc::invalid_argument, "history cannot contain undo");
    session.history.push_back({std::get<EditCommand>(command), layout_from_record(detail::require(entry, "layout"))});
  }
  session.canvas = session.history.front().layout.canvas;
  return session;
}

}  // namespace glyphplan
