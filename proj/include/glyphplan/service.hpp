#pragma once

#include <filesystem>
#include <fstream>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "glyphplan/backend.hpp"
#include "glyphplan/edit_session.hpp"
#include "glyphplan/error.hpp"
#include "glyphplan/eval.hpp"
#include "glyphplan/planner.hpp"
#include "glyphplan/record_io.hpp"
#include "glyphplan/tokenizer.hpp"

namespace glyphplan {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<BackendConfig> backend;
  std::size_t session_capacity = 256;
  std::size_t body_limit = 1 << 20;
  std::optional<std::filesystem::path> snapshot;  // sessions persisted here when set
  Canvas canvas;
  std::shared_ptr<const Vocabulary> vocab;        // byte-level base, angle tokens on, when unset
};

inline void validate_service_config(const ServiceConfig& config) {
  if (config.session_capacity == 0) throw error(errc::invalid_argument, "session capacity must be positive");
  if (config.body_limit == 0) throw error(errc::invalid_argument, "body limit must be positive");
  if (config.canvas.side <= 0) throw error(errc::invalid_argument, "canvas side must be positive");
  if (config.backend) validate_backend_config(*config.backend);
}

/// HTTP status for a library error.
constexpr int http_status(errc code) noexcept {
  switch (code) {
    case errc::session_not_found: return 404;
    case errc::nothing_to_undo: return 409;
    case errc::layout_infeasible: return 422;
    case errc::backend_unreachable:
    case errc::backend_malformed: return 502;
    case errc::timeout: return 504;
    default: return 400;
  }
}

struct Reply {
  int status = 200;
  json body;
};

inline Reply error_reply(int status, std::string_view code, const std::string& message) {
  return {status, {{"error", {{"code", code}, {"message", message}}}}};
}

/// In-memory sessions with least-recently-used eviction. Each session sits in
/// its own slot; commands against one slot are serialized by its mutex and
/// the session value is replaced whole, so readers never see a partial edit.
class SessionStore {
 public:
  struct Slot {
    std::mutex mutex;
    Session session;
  };

  explicit SessionStore(std::size_t capacity) : capacity_(capacity) {}

  void insert(Session session) {
    std::lock_guard lock(mutex_);
    auto slot = std::make_shared<Slot>();
    const std::string id = session.id;
    slot->session = std::move(session);
    if (auto it = index_.find(id); it != index_.end()) {
      order_.erase(it->second.second);
      index_.erase(it);
    }
    while (index_.size() >= capacity_ && !order_.empty()) {
      index_.erase(order_.back());
      order_.pop_back();
    }
    order_.push_front(id);
    index_.emplace(id, std::make_pair(std::move(slot), order_.begin()));
  }

  std::shared_ptr<Slot> find(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = index_.find(id);
    if (it == index_.end()) return nullptr;
    order_.splice(order_.begin(), order_, it->second.second);
    return it->second.first;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return index_.size();
  }

  /// Copies every session, least recently used first.
  std::vector<Session> snapshot() const {
    std::vector<std::shared_ptr<Slot>> slots;
    {
      std::lock_guard lock(mutex_);
      for (auto it = order_.rbegin(); it != order_.rend(); ++it) slots.push_back(index_.at(*it).first);
    }
    std::vector<Session> out;
    for (const auto& slot : slots) {
      std::lock_guard lock(slot->mutex);
      out.push_back(slot->session);
    }
    return out;
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<std::string> order_;  // most recent first
  std::unordered_map<std::string, std::pair<std::shared_ptr<Slot>, std::list<std::string>::iterator>> index_;
};

class Service {
 public:
  explicit Service(ServiceConfig config) : config_(std::move(config)), store_(config_.session_capacity) {
    validate_service_config(config_);
    if (!config_.vocab) config_.vocab = std::make_shared<const Vocabulary>(BpeModel::byte_level(), true);
    if (config_.snapshot && std::filesystem::exists(*config_.snapshot)) load_snapshot();
  }

  const ServiceConfig& config() const noexcept { return config_; }
  SessionStore& sessions() noexcept { return store_; }

  /// Routes one request. Never throws.
  Reply dispatch(std::string_view method, std::string_view path, std::string_view body) {
    try {
      return route(method, path, body);
    } catch (const error& e) {
      return error_reply(http_status(e.code()), code_name(e.code()), e.what());
    } catch (const json::exception& e) {
      return error_reply(400, "invalid_argument", e.what());
    } catch (const std::exception& e) {
      return error_reply(500, "internal", e.what());
    }
  }

  /// Installs the /v1 routes on an httplib server.
  void mount(httplib::Server& server) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      auto reply = dispatch(req.method, req.path, req.body);
      res.status = reply.status;
      res.set_content(reply.body.dump(), "application/json");
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.set_payload_max_length(config_.body_limit);
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      const auto code = res.status == 413 ? "payload_too_large" : res.status == 405 ? "method_not_allowed" : "not_found";
      res.set_content(error_reply(res.status, code, httplib::status_message(res.status)).body.dump(), "application/json");
    });
  }

 private:
  static std::vector<std::string_view> segments(std::string_view path) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < path.size()) {
      while (i < path.size() && path[i] == '/') ++i;
      const auto j = path.find('/', i);
      const auto end = j == std::string_view::npos ? path.size() : j;
      if (end > i) out.push_back(path.substr(i, end - i));
      i = end;
    }
    return out;
  }

  static json parse_body(std::string_view body) {
    if (alphabet::trim(body).empty()) return json::object();
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw error(errc::invalid_argument, "request body must be a JSON object");
    return j;
  }

  Reply route(std::string_view method, std::string_view path, std::string_view raw_body) {
    const auto seg = segments(path);
    if (seg.empty() || seg[0] != "v1") return error_reply(404, "not_found", "no route for " + std::string(path));
    const bool post = method == "POST";
    const bool get = method == "GET";

    if (seg.size() == 2 && seg[1] == "health" && get) return {200, {{"status", "ok"}}};
    if (seg.size() == 2 && seg[1] == "plan" && post) return plan(parse_body(raw_body));
    if (seg.size() == 2 && seg[1] == "sessions" && post) return create(parse_body(raw_body));
    if (seg.size() == 3 && seg[1] == "sessions" && get) return show(std::string(seg[2]));
    if (seg.size() == 4 && seg[1] == "sessions" && seg[3] == "edit" && post) {
      const auto body = parse_body(raw_body);
      return edit(std::string(seg[2]), parse_command(detail::require_string(body, "command")));
    }
    if (seg.size() == 4 && seg[1] == "sessions" && seg[3] == "undo" && post) {
      return edit(std::string(seg[2]), UndoCommand{});
    }
    if (seg.size() == 2 && seg[1] == "encode" && post) return encode_route(parse_body(raw_body));
    if (seg.size() == 2 && seg[1] == "decode" && post) return decode_route(parse_body(raw_body));
    if (seg.size() == 2 && seg[1] == "eval" && post) return eval_route(parse_body(raw_body));
    return error_reply(404, "not_found", "no route for " + std::string(method) + " " + std::string(path));
  }

  PlannerChoice planner_for(const json& body) const {
    PlannerChoice choice;
    if (body.contains("backend") && !body.at("backend").is_null()) {
      if (!body.at("backend").is_boolean()) throw error(errc::invalid_argument, "backend must be a boolean");
      if (body.at("backend").get<bool>()) {
        if (!config_.backend) throw error(errc::invalid_argument, "no backend is configured on this service");
        choice.backend = config_.backend;
      }
    }
    return choice;
  }

  static json layout_reply(const Layout& layout, std::optional<std::string> prompt,
                           const std::vector<Violation>& warnings = {}) {
    json out = layout_to_record(layout, std::nullopt, std::move(prompt));
    json list = json::array();
    for (const auto& w : warnings) list.push_back(w.message);
    out["warnings"] = std::move(list);
    return out;
  }

  Reply plan(const json& body) {
    const auto request = request_from_json(body);
    const auto choice = planner_for(body);
    if (choice.backend) {
      auto result = plan_via_backend(request, *choice.backend, config_.canvas);
      json out = layout_to_record(result.layout, std::nullopt, request.prompt);
      json warnings = json::array();
      for (const auto& w : result.warnings) warnings.push_back("line " + std::to_string(w.line) + ": " + w.message);
      out["warnings"] = std::move(warnings);
      return {200, std::move(out)};
    }
    return {200, layout_reply(plan_layout(request, config_.canvas), request.prompt)};
  }

  Reply create(const json& body) {
    const auto request = request_from_json(body);
    auto session = create_session(request, planner_for(body), config_.canvas);
    json out{{"session_id", session.id}, {"layout", layout_to_record(session.current(), std::nullopt, request.prompt)}};
    store_.insert(std::move(session));
    persist();
    return {201, std::move(out)};
  }

  std::shared_ptr<SessionStore::Slot> slot_for(const std::string& id) {
    auto slot = store_.find(id);
    if (!slot) throw error(errc::session_not_found, "no session " + id);
    return slot;
  }

  Reply show(const std::string& id) {
    auto slot = slot_for(id);
    std::lock_guard lock(slot->mutex);
    return {200, session_to_json(slot->session)};
  }

  Reply edit(const std::string& id, const SessionCommand& command) {
    auto slot = slot_for(id);
    json out;
    {
      std::lock_guard lock(slot->mutex);
      auto next = apply_command(slot->session, command);
      slot->session = std::move(next);
      const auto& layout = slot->session.current();
      std::vector<Violation> warnings;
      for (const auto& v : validate_layout(layout).violations) {
        if (v.severity == Severity::warning) warnings.push_back(v);
      }
      out = {{"layout", layout_to_record(layout, std::nullopt, slot->session.request.prompt)},
             {"history_length", slot->session.history.size()}};
      json list = json::array();
      for (const auto& w : warnings) list.push_back(w.message);
      out["warnings"] = std::move(list);
    }
    persist();
    return {200, std::move(out)};
  }

  EncodeOptions encode_options(const json& body, std::optional<ReprVariant> fallback) const {
    EncodeOptions options;
    if (body.contains("level")) {
      auto level = parse_level_name(body.at("level").get<std::string>());
      if (!level) throw error(errc::invalid_argument, "level must be 'char' or 'subword'");
      options.level = *level;
    }
    options.variant = fallback.value_or(ReprVariant::ltrb);
    if (body.contains("variant")) {
      auto variant = parse_repr_name(body.at("variant").get<std::string>());
      if (!variant) throw error(errc::invalid_argument, "unknown variant");
      options.variant = *variant;
    }
    options.max_length = body.contains("L") ? body.at("L").get<std::size_t>() : default_length_for(options.variant);
    if (options.max_length == 0) throw error(errc::invalid_argument, "L must be positive");
    return options;
  }

  Reply encode_route(const json& body) {
    const auto prompt = detail::require_string(body, "prompt");
    const auto layout = layout_from_record(detail::require(body, "layout"));
    const auto options = encode_options(body, layout_variant(layout));
    return {200, sequence_to_record(encode(prompt, layout, *config_.vocab, options))};
  }

  Reply decode_route(const json& body) {
    json record = body;
    if (!record.contains("L") && record.contains("ids") && record.at("ids").is_array()) record["L"] = record.at("ids").size();
    const auto seq = sequence_from_record(record, *config_.vocab);
    const auto decoded = decode(seq, *config_.vocab, config_.canvas);
    return {200, {{"prompt", decoded.prompt}, {"layout", layout_to_record(decoded.layout, seq.variant)}}};
  }

  Reply eval_route(const json& body) {
    BenchmarkConfig bench;
    bench.vocab = config_.vocab;
    if (body.contains("iou_threshold")) bench.iou_threshold = body.at("iou_threshold").get<double>();
    if (body.contains("case_sensitive")) bench.case_sensitive = body.at("case_sensitive").get<bool>();
    if (body.contains("lengths")) bench.lengths = body.at("lengths").get<std::vector<std::size_t>>();
    bench.encode = encode_options(body, std::nullopt);
    if (body.contains("dataset")) {
      const auto& dataset = body.at("dataset");
      if (!dataset.is_array()) throw error(errc::invalid_argument, "dataset must be an array of records");
      std::vector<BenchmarkRecord> records;
      std::vector<std::size_t> lines;
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        try {
          records.push_back(benchmark_record_from_json(dataset[i]));
        } catch (const error& e) {
          throw error(errc::dataset_parse_error, "record " + std::to_string(i + 1) + ": " + e.what(), i + 1);
        }
        lines.push_back(i + 1);
      }
      return {200, report_to_json(evaluate_records(records, lines, std::move(bench)))};
    }
    if (body.contains("path")) return {200, report_to_json(run_benchmark(detail::require_string(body, "path"), std::move(bench)))};
    throw error(errc::invalid_argument, "eval needs 'dataset' or 'path'");
  }

  void persist() {
    if (!config_.snapshot) return;
    std::lock_guard lock(snapshot_mutex_);
    json all = json::array();
    for (const auto& s : store_.snapshot()) all.push_back(session_to_json(s));
    const auto tmp = config_.snapshot->string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw error(errc::io_error, "cannot write snapshot " + tmp);
      out << all.dump();
    }
    std::filesystem::rename(tmp, *config_.snapshot);
  }

  void load_snapshot() {
    std::ifstream in(*config_.snapshot, std::ios::binary);
    auto all = json::parse(in, nullptr, false);
    if (all.is_discarded() || !all.is_array()) {
      throw error(errc::io_error, "snapshot " + config_.snapshot->string() + " is not a session array");
    }
    for (const auto& s : all) store_.insert(session_from_json(s));
  }

  ServiceConfig config_;
  SessionStore store_;
  std::mutex snapshot_mutex_;
};

/// Binds and serves until `server.stop()`; returns false when binding fails.
inline bool serve(Service& service, httplib::Server& server) {
  service.mount(server);
  const auto& c = service.config();
  if (!server.bind_to_port(c.host, c.port)) return false;
  return server.listen_after_bind();
}

}  // namespace glyphplan
