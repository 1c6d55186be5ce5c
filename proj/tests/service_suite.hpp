#pragma once

// Golden request suite for the /v1 service. Cases run in order against one
// Service; "{sid}" in a path is replaced by the session id created earlier.

#include <functional>
#include <string>
#include <vector>

#include "mock_backend.hpp"
#include "schemas.hpp"

namespace testsupport {

struct ServiceCase {
  std::string name;
  std::string method;
  std::string path;
  std::string body;
  int status;
  std::function<std::string(const glyphplan::json&)> check;
};

struct ServiceOutcome {
  std::string name;
  std::string failure;  // empty on success
};

inline std::function<std::string(const glyphplan::json&)> error_code(std::string code) {
  return [code](const glyphplan::json& j) { return schema::error_reply(j, code); };
}

inline std::vector<ServiceCase> golden_service_cases() {
  using glyphplan::json;
  const std::string layout = R"({"lines":[{"text":"WILD","box":[10,20,60,35]}],"repr":"ltrb","canvas":128})";
  const std::string long_prompt(100, 'p');
  const std::string dataset =
      R"({"dataset":[{"prompt":"a sign","gt_keywords":["STOP"],"lines":[{"text":"stop","box":[0,0,10,10]}]}]})";
  return {
      {"health", "GET", "/v1/health", "", 200,
       [](const json& j) { return j.value("status", "") == "ok" ? "" : "status is not ok"; }},
      {"plan STOP NOW", "POST", "/v1/plan", R"({"prompt":"a sign that says STOP NOW"})", 200,
       [](const json& j) {
         if (auto why = schema::plan_reply(j); !why.empty()) return why;
         if (j["lines"].size() != 1 || j["lines"][0]["text"] != "STOP NOW") return std::string("expected one STOP NOW line");
         return std::string();
       }},
      {"plan with keywords and seed", "POST", "/v1/plan", R"({"prompt":"p","keywords":["A","B"],"seed":3})", 200,
       [](const json& j) {
         if (auto why = schema::plan_reply(j); !why.empty()) return why;
         return j["lines"].size() == 2 ? std::string() : std::string("expected two lines");
       }},
      {"plan missing prompt", "POST", "/v1/plan", "{}", 400, error_code("invalid_argument")},
      {"plan body not json", "POST", "/v1/plan", "prompt=x", 400, error_code("invalid_argument")},
      {"plan too many rows", "POST", "/v1/plan",
       json{{"prompt", "p"}, {"keywords", std::vector<std::string>(30, "A")}}.dump(), 422, error_code("layout_infeasible")},
      {"plan backend not configured", "POST", "/v1/plan", R"({"prompt":"p","backend":true})", 400,
       error_code("invalid_argument")},
      {"create session", "POST", "/v1/sessions", R"({"prompt":"a poster of \"WILD\""})", 201, schema::session_created},
      {"show session", "GET", "/v1/sessions/{sid}", "", 200, schema::session_state},
      {"edit move", "POST", "/v1/sessions/{sid}/edit", R"({"command":"move 0 right 10"})", 200,
       [](const json& j) {
         if (auto why = schema::edit_reply(j); !why.empty()) return why;
         return j["history_length"] == 2 ? std::string() : std::string("history_length should be 2");
       }},
      {"edit malformed command", "POST", "/v1/sessions/{sid}/edit", R"({"command":"dance 0"})", 400,
       error_code("invalid_command")},
      {"edit bad index", "POST", "/v1/sessions/{sid}/edit", R"({"command":"move 9 1 1"})", 400,
       error_code("index_out_of_range")},
      {"undo", "POST", "/v1/sessions/{sid}/undo", "", 200,
       [](const json& j) {
         if (auto why = schema::edit_reply(j); !why.empty()) return why;
         return j["history_length"] == 1 ? std::string() : std::string("history_length should be 1");
       }},
      {"undo past start", "POST", "/v1/sessions/{sid}/undo", "", 409, error_code("nothing_to_undo")},
      {"unknown session show", "GET", "/v1/sessions/nope", "", 404, error_code("session_not_found")},
      {"unknown session edit", "POST", "/v1/sessions/nope/edit", R"({"command":"move 0 1 1"})", 404,
       error_code("session_not_found")},
      {"encode", "POST", "/v1/encode", R"({"prompt":"a sign","layout":)" + layout + "}", 200, schema::encode_reply},
      {"encode subword L 64", "POST", "/v1/encode", R"({"prompt":"a sign","level":"subword","L":64,"layout":)" + layout + "}",
       200,
       [](const json& j) {
         if (auto why = schema::encode_reply(j); !why.empty()) return why;
         return j["L"] == 64 ? std::string() : std::string("L should be 64");
       }},
      {"encode too long", "POST", "/v1/encode",
       json{{"prompt", long_prompt}, {"layout", json::parse(
                                                    R"({"lines":[{"text":"ABCDEFGHIJKLMNOPQRSTUVWXYZ","box":[0,0,10,10]}]})")}}
           .dump(),
       400, error_code("sequence_too_long")},
      {"encode bad level", "POST", "/v1/encode", R"({"prompt":"a","level":"word","layout":)" + layout + "}", 400,
       error_code("invalid_argument")},
      {"decode", "POST", "/v1/decode", "{ENCODED}", 200,
       [](const json& j) {
         if (auto why = schema::decode_reply(j); !why.empty()) return why;
         if (j["prompt"] != "a sign" || j["layout"]["lines"][0]["text"] != "WILD") return std::string("decode mismatch");
         return std::string();
       }},
      {"decode bad id", "POST", "/v1/decode", R"({"ids":[999999]})", 400, error_code("structure_error")},
      {"eval inline", "POST", "/v1/eval", dataset, 200,
       [](const json& j) {
         if (auto why = schema::eval_reply(j); !why.empty()) return why;
         return j["keywords"]["f_measure"] == 1.0 ? std::string() : std::string("f_measure should be 1");
       }},
      {"eval empty", "POST", "/v1/eval", R"({"dataset":[]})", 400, error_code("empty_dataset")},
      {"eval bad record", "POST", "/v1/eval", R"({"dataset":[{"prompt":"x"}]})", 400, error_code("dataset_parse_error")},
      {"unknown route", "GET", "/v1/nothing", "", 404, error_code("not_found")},
      {"wrong method", "GET", "/v1/plan", "", 404, error_code("not_found")},
  };
}

/// Runs the suite. The "decode" case posts the ids produced by "encode".
inline std::vector<ServiceOutcome> run_service_suite(glyphplan::Service& service) {
  std::vector<ServiceOutcome> out;
  std::string sid;
  std::string encoded;
  for (auto c : golden_service_cases()) {
    if (const auto at = c.path.find("{sid}"); at != std::string::npos) c.path.replace(at, 5, sid);
    if (c.body == "{ENCODED}") c.body = encoded;
    const auto reply = service.dispatch(c.method, c.path, c.body);
    std::string failure;
    if (reply.status != c.status) {
      failure = "status " + std::to_string(reply.status) + ", expected " + std::to_string(c.status) + ": " + reply.body.dump();
    } else {
      failure = c.check(reply.body);
    }
    if (c.name == "create session" && reply.body.contains("session_id")) sid = reply.body["session_id"];
    if (c.name == "encode") encoded = reply.body.dump();
    out.push_back({c.name, failure});
  }
  return out;
}

/// Backend-routed cases against a scripted endpoint and a dead one.
inline std::vector<ServiceOutcome> run_backend_cases() {
  using glyphplan::json;
  std::vector<ServiceOutcome> out;
  MockBackend mock({{200, MockBackend::content("WILD 10,20,60,35")}});
  glyphplan::ServiceConfig config;
  glyphplan::BackendConfig backend;
  backend.url = mock.url();
  backend.timeout = std::chrono::milliseconds(2000);
  config.backend = backend;
  glyphplan::Service service(config);
  auto reply = service.dispatch("POST", "/v1/plan", R"({"prompt":"a poster","backend":true})");
  std::string failure = reply.status == 200 ? schema::plan_reply(reply.body) : "status " + std::to_string(reply.status);
  if (failure.empty() && reply.body["lines"][0]["box"] != json::array({10, 20, 60, 35})) failure = "backend layout not used";
  out.push_back({"plan via backend", failure});

  backend.url = "http://127.0.0.1:" + std::to_string(closed_port()) + "/chat";
  config.backend = backend;
  glyphplan::Service dead(config);
  reply = dead.dispatch("POST", "/v1/plan", R"({"prompt":"a poster","backend":true})");
  failure = reply.status == 502 ? schema::error_reply(reply.body, "backend_unreachable") : "status " + std::to_string(reply.status);
  out.push_back({"backend unreachable", failure});
  return out;
}

}  // namespace testsupport
