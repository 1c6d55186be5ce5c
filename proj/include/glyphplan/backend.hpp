#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "glyphplan/error.hpp"
#include "glyphplan/grammar.hpp"
#include "glyphplan/layout.hpp"
#include "glyphplan/planner.hpp"

namespace glyphplan {

struct BackendConfig {
  std::string url;  // http://host[:port][/path]
  std::chrono::milliseconds timeout{10000};
  int max_retries = 2;
  ParseMode mode = ParseMode::lenient;
};

inline void validate_backend_config(const BackendConfig& config) {
  if (config.max_retries < 0) throw error(errc::invalid_argument, "retries must be non-negative");
  if (config.timeout.count() <= 0) throw error(errc::invalid_argument, "timeout must be positive");
  if (config.url.empty()) throw error(errc::invalid_argument, "backend url is empty");
}

/// One request/response round trip, kept verbatim for audit.
struct Exchange {
  std::string request_body;
  int status = 0;
  std::string response_body;
  std::string outcome;
};

struct BackendPlan {
  Layout layout;
  std::vector<ParseWarning> warnings;
  std::vector<Exchange> transcript;
};

namespace detail {

struct Endpoint {
  std::string origin;  // scheme://host:port
  std::string path;
};

inline Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw error(errc::invalid_argument, "backend url lacks a scheme: " + url);
  if (url.compare(0, scheme_end, "http") != 0) {
    throw error(errc::invalid_argument, "only http backends are supported: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

inline nlohmann::json chat_request(const PlannerPrompt& prompt) {
  return {{"messages",
           nlohmann::json::array({{{"role", "system"}, {"content", prompt.description}},
                                  {{"role", "user"}, {"content", prompt_body(prompt)}}})}};
}

/// Reply text from {"content": ...} or a chat-completions style
/// {"choices": [{"message": {"content": ...}}]} body.
inline std::optional<std::string> reply_content(const std::string& body) {
  auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  if (auto it = doc.find("content"); it != doc.end() && it->is_string()) return it->get<std::string>();
  if (auto it = doc.find("choices"); it != doc.end() && it->is_array() && !it->empty()) {
    const auto& first = (*it)[0];
    if (first.contains("message") && first["message"].contains("content") &&
        first["message"]["content"].is_string()) {
      return first["message"]["content"].get<std::string>();
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Asks a chat-style model endpoint for a layout. The system message is the
/// task description and the user message the prompt body. Malformed replies
/// (unparsable bodies, or any bad line in strict mode) are retried up to
/// `max_retries` times.
inline BackendPlan plan_via_backend(const PlanRequest& request, const BackendConfig& config,
                                    const Canvas& canvas = {}) {
  validate_request(request);
  validate_backend_config(config);
  const auto endpoint = detail::split_url(config.url);

  PlannerPrompt prompt;
  prompt.prompt = request.prompt;
  prompt.keywords = request.keywords;
  const std::string body = detail::chat_request(prompt).dump();

  httplib::Client client(endpoint.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  BackendPlan plan;
  std::string last_problem;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    Exchange exchange{body, 0, {}, {}};
    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(endpoint.path, body, "application/json");
    if (!res) {
      const auto elapsed = std::chrono::steady_clock::now() - started;
      const auto err = res.error();
      exchange.outcome = httplib::to_string(err);
      plan.transcript.push_back(exchange);
      if (err == httplib::Error::ConnectionTimeout ||
          (err == httplib::Error::Read && elapsed >= config.timeout * 9 / 10)) {
        throw error(errc::timeout, "backend timed out after " + std::to_string(config.timeout.count()) + " ms");
      }
      throw error(errc::backend_unreachable, "backend " + config.url + " unreachable: " + exchange.outcome);
    }
    exchange.status = res->status;
    exchange.response_body = res->body;
    if (res->status < 200 || res->status >= 300) {
      last_problem = "http status " + std::to_string(res->status);
      exchange.outcome = last_problem;
      plan.transcript.push_back(std::move(exchange));
      continue;
    }
    auto content = detail::reply_content(res->body);
    if (!content) {
      last_problem = "reply body has no content field";
      exchange.outcome = last_problem;
      plan.transcript.push_back(std::move(exchange));
      continue;
    }
    try {
      auto parsed = parse_layout(*content, ReprVariant::ltrb, canvas, config.mode);
      if (!validate_layout(parsed.layout).ok()) {
        last_problem = "parsed layout failed validation";
        exchange.outcome = last_problem;
        plan.transcript.push_back(std::move(exchange));
        continue;
      }
      exchange.outcome = "ok";
      plan.transcript.push_back(std::move(exchange));
      plan.layout = std::move(parsed.layout);
      plan.warnings = std::move(parsed.warnings);
      return plan;
    } catch (const error& e) {
      last_problem = e.what();
      exchange.outcome = last_problem;
      plan.transcript.push_back(std::move(exchange));
    }
  }
  throw error(errc::backend_malformed, "backend output malformed after " +
                                           std::to_string(config.max_retries + 1) +
                                           " attempt(s): " + last_problem);
}

}  // namespace glyphplan
