// Command-line front end: planning, editing, token encoding, evaluation,
// fine-tuning data export, and the HTTP service.

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glyphplan/glyphplan.hpp"

namespace gp = glyphplan;
using gp::json;

namespace {

struct GlobalOptions {
  std::string output = "human";
  std::string vocab_path;
  int canvas = gp::default_canvas_side;

  bool machine() const { return output == "json"; }
};

struct RequestOptions {
  std::string prompt;
  std::vector<std::string> keywords;
  std::uint64_t seed = 0;
  std::string backend_url;
  long long timeout_ms = 10000;
  int retries = 2;
  bool strict = false;

  gp::PlanRequest request() const {
    gp::PlanRequest r{prompt, std::nullopt, seed};
    if (!keywords.empty()) r.keywords = keywords;
    return r;
  }

  std::optional<gp::BackendConfig> backend() const {
    if (backend_url.empty()) return std::nullopt;
    gp::BackendConfig c;
    c.url = backend_url;
    c.timeout = std::chrono::milliseconds(timeout_ms);
    c.max_retries = retries;
    c.mode = strict ? gp::ParseMode::strict : gp::ParseMode::lenient;
    return c;
  }
};

void add_backend_flags(CLI::App* cmd, RequestOptions& o) {
  cmd->add_option("--backend-url", o.backend_url, "Chat-style planner endpoint (http://host:port/path)")
      ->envname("GLYPHPLAN_BACKEND_URL");
  cmd->add_option("--timeout-ms", o.timeout_ms, "Backend request timeout")
      ->envname("GLYPHPLAN_TIMEOUT_MS")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--retries", o.retries, "Retries on malformed backend output")
      ->envname("GLYPHPLAN_RETRIES")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--strict", o.strict, "Reject backend output containing any unparsable line")
      ->envname("GLYPHPLAN_STRICT");
}

void add_request_flags(CLI::App* cmd, RequestOptions& o) {
  cmd->add_option("--prompt", o.prompt, "Image prompt")->required();
  cmd->add_option("--keyword,-k", o.keywords, "Keyword to lay out (repeatable)");
  cmd->add_option("--seed", o.seed, "Seed for the heuristic planner");
  add_backend_flags(cmd, o);
}

gp::ReprVariant variant_from(const std::string& name) {
  auto v = gp::parse_repr_name(name);
  if (!v) throw gp::error(gp::errc::invalid_argument, "unknown variant " + name);
  return *v;
}

gp::TokenizationLevel level_from(const std::string& name) {
  auto l = gp::parse_level_name(name);
  if (!l) throw gp::error(gp::errc::invalid_argument, "unknown level " + name);
  return *l;
}

const std::vector<std::string> variant_names = {"ltrb", "center", "lt", "ltrb_angle", "quad"};

gp::Vocabulary load_vocabulary(const GlobalOptions& g) {
  auto base = g.vocab_path.empty() ? gp::BpeModel::byte_level() : gp::BpeModel::load_file(g.vocab_path);
  return gp::Vocabulary(std::move(base), true);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gp::error(gp::errc::io_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// A layout record (JSON object, first non-blank line of a record file) or
/// language-format text.
gp::Layout read_layout(const std::string& path, gp::ReprVariant variant, const gp::Canvas& canvas) {
  const auto text = read_file(path);
  const auto trimmed = gp::alphabet::trim(text);
  if (!trimmed.empty() && trimmed.front() == '{') {
    std::istringstream in(text);
    std::optional<gp::Layout> layout;
    std::string line;
    while (!layout && std::getline(in, line)) {
      if (gp::alphabet::trim(line).empty()) continue;
      layout = gp::layout_from_record(json::parse(line));
    }
    if (layout) return *layout;
  }
  return gp::parse_layout(text, variant, canvas, gp::ParseMode::strict).layout;
}

void print_layout(const gp::Layout& layout, const std::string& prompt, const GlobalOptions& g,
                  std::optional<gp::ReprVariant> variant = std::nullopt) {
  if (g.machine()) {
    std::cout << gp::layout_to_record(layout, variant, prompt).dump() << '\n';
    return;
  }
  const auto text = gp::serialize_layout(layout, variant.value_or(gp::layout_variant(layout)));
  if (!text.empty()) std::cout << text << '\n';
}

int run_edit_loop(const RequestOptions& o, const GlobalOptions& g) {
  gp::PlannerChoice planner{o.backend()};
  auto session = gp::create_session(o.request(), planner, gp::Canvas{g.canvas});
  print_layout(session.current(), session.request.prompt, g);
  std::string line;
  while (std::getline(std::cin, line)) {
    const auto cmd = gp::alphabet::trim(line);
    if (cmd.empty()) continue;
    if (cmd == "quit" || cmd == "exit") break;
    if (cmd == "show") {
      std::cout << (g.machine() ? gp::session_to_json(session).dump() : gp::serialize_layout(session.current(), gp::layout_variant(session.current())))
                << '\n';
      continue;
    }
    try {
      session = gp::apply_command(std::move(session), gp::parse_command(cmd));
      print_layout(session.current(), session.request.prompt, g);
    } catch (const gp::error& e) {
      std::cout << "error: " << gp::code_name(e.code()) << ": " << e.what() << '\n';
    }
    std::cout.flush();
  }
  return 0;
}

httplib::Server* running_server = nullptr;

void stop_server(int) {
  if (running_server) running_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glyphplan: text layout planning, tokenization, and evaluation toolkit"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--output,-o", g.output, "Output form")
      ->check(CLI::IsMember({"human", "json"}))
      ->envname("GLYPHPLAN_OUTPUT");
  app.add_option("--vocab", g.vocab_path, "Base subword vocabulary file (byte-level when omitted)")
      ->envname("GLYPHPLAN_VOCAB");
  app.add_option("--canvas", g.canvas, "Canvas side in grid units")->envname("GLYPHPLAN_CANVAS")->check(CLI::PositiveNumber);

  // plan
  RequestOptions plan_opts;
  std::string plan_variant = "ltrb";
  auto* plan = app.add_subcommand("plan", "Plan a layout for a prompt");
  add_request_flags(plan, plan_opts);
  plan->add_option("--variant", plan_variant, "Output representation")->check(CLI::IsMember(variant_names));

  // edit
  RequestOptions edit_opts;
  auto* edit = app.add_subcommand("edit", "Interactive edit session reading commands from stdin");
  add_request_flags(edit, edit_opts);

  // encode
  std::string enc_prompt, enc_layout, enc_level = "char", enc_variant;
  std::size_t enc_length = 0;
  auto* enc = app.add_subcommand("encode", "Encode a prompt and layout into token ids");
  enc->add_option("--prompt", enc_prompt, "Image prompt")->required();
  enc->add_option("--layout", enc_layout, "Layout record file or language-format text file")->required();
  enc->add_option("--level", enc_level, "Keyword tokenization level")->check(CLI::IsMember({"char", "subword"}));
  enc->add_option("--variant", enc_variant, "Coordinate representation (defaults to the layout's)")
      ->check(CLI::IsMember(variant_names));
  enc->add_option("--L,--max-length", enc_length, "Sequence length (128, or 256 for quad)");

  // decode
  std::string dec_input, dec_ids, dec_level = "char", dec_variant = "ltrb";
  std::size_t dec_length = 0, dec_prompt_length = 0;
  auto* dec = app.add_subcommand("decode", "Decode a token record back to prompt and layout");
  auto* dec_in = dec->add_option("--input", dec_input, "Token record file (JSON)");
  auto* dec_ids_opt = dec->add_option("--ids", dec_ids, "Comma-separated token ids");
  dec_in->excludes(dec_ids_opt);
  dec->add_option("--level", dec_level, "Keyword tokenization level")->check(CLI::IsMember({"char", "subword"}));
  dec->add_option("--variant", dec_variant, "Coordinate representation")->check(CLI::IsMember(variant_names));
  dec->add_option("--L,--max-length", dec_length, "Sequence length (defaults to the id count)");
  dec->add_option("--prompt-length", dec_prompt_length, "Prompt token count (subword level)");

  // eval run
  auto* eval = app.add_subcommand("eval", "Evaluation harness");
  eval->require_subcommand(1);
  auto* eval_run = eval->add_subcommand("run", "Score a dataset of predicted layouts");
  std::string eval_dataset;
  gp::BenchmarkConfig bench;
  std::string eval_level = "char", eval_variant = "ltrb";
  eval_run->add_option("--dataset", eval_dataset, "Layout records with gt_keywords")->required();
  eval_run->add_option("--iou-threshold", bench.iou_threshold, "Detection IoU threshold")
      ->check(CLI::Range(0.0, 1.0));
  eval_run->add_flag("--case-sensitive", bench.case_sensitive, "Exact-case keyword matching");
  eval_run->add_option("--lengths", bench.lengths, "Sequence limits for the coverage table")->delimiter(',');
  eval_run->add_option("--level", eval_level, "Keyword tokenization level")->check(CLI::IsMember({"char", "subword"}));
  eval_run->add_option("--variant", eval_variant, "Coordinate representation")->check(CLI::IsMember(variant_names));

  // dataprep export
  auto* dataprep = app.add_subcommand("dataprep", "Fine-tuning data preparation");
  dataprep->require_subcommand(1);
  auto* dp_export = dataprep->add_subcommand("export", "Convert caption/OCR records into instruction pairs");
  std::string dp_input, dp_output;
  gp::ExportOptions dp_opts;
  dp_export->add_option("--input", dp_input, "Caption/OCR records")->required();
  dp_export->add_option("--output-dir", dp_output, "Directory for split files and manifest")->required();
  dp_export->add_option("--splits", dp_opts.splits, "Samples per split, e.g. 2500,5000")->delimiter(',');
  dp_export->add_option("--seed", dp_opts.seed, "Shuffle seed");
  dp_export->add_flag("--allow-overlap", dp_opts.allow_overlap, "Draw splits as nested subsets");
  dp_export->add_flag("--keep-empty", dp_opts.sample.keep_empty, "Keep samples without OCR lines");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  gp::ServiceConfig svc;
  RequestOptions svc_backend;
  std::string snapshot;
  serve->add_option("--host", svc.host, "Bind address")->envname("GLYPHPLAN_HOST");
  serve->add_option("--port", svc.port, "Bind port")->envname("GLYPHPLAN_PORT");
  serve->add_option("--capacity", svc.session_capacity, "Session store capacity")
      ->envname("GLYPHPLAN_CAPACITY")
      ->check(CLI::PositiveNumber);
  serve->add_option("--body-limit", svc.body_limit, "Request body size limit in bytes")
      ->envname("GLYPHPLAN_BODY_LIMIT")
      ->check(CLI::PositiveNumber);
  serve->add_option("--snapshot", snapshot, "Persist sessions to this file")->envname("GLYPHPLAN_SNAPSHOT");
  add_backend_flags(serve, svc_backend);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const gp::Canvas canvas{g.canvas};
  try {
    if (*plan) {
      const auto request = plan_opts.request();
      if (auto backend = plan_opts.backend()) {
        auto result = gp::plan_via_backend(request, *backend, canvas);
        for (const auto& w : result.warnings) std::cerr << "warning: line " << w.line << ": " << w.message << '\n';
        print_layout(result.layout, request.prompt, g, variant_from(plan_variant));
      } else {
        print_layout(gp::plan_layout(request, canvas), request.prompt, g, variant_from(plan_variant));
      }
    } else if (*edit) {
      return run_edit_loop(edit_opts, g);
    } else if (*enc) {
      const auto vocab = load_vocabulary(g);
      const auto layout = read_layout(enc_layout, enc_variant.empty() ? gp::ReprVariant::ltrb : variant_from(enc_variant), canvas);
      gp::EncodeOptions options;
      options.level = level_from(enc_level);
      options.variant = enc_variant.empty() ? gp::layout_variant(layout) : variant_from(enc_variant);
      options.max_length = enc_length ? enc_length : gp::default_length_for(options.variant);
      const auto record = gp::sequence_to_record(gp::encode(enc_prompt, layout, vocab, options));
      std::cout << (g.machine() ? record.dump() : record.dump(2)) << '\n';
    } else if (*dec) {
      const auto vocab = load_vocabulary(g);
      json record;
      if (!dec_input.empty()) {
        record = json::parse(read_file(dec_input));
      } else {
        if (dec_ids.empty()) throw gp::error(gp::errc::invalid_argument, "decode needs --input or --ids");
        std::vector<int> ids;
        std::stringstream ss(dec_ids);
        std::string item;
        while (std::getline(ss, item, ',')) ids.push_back(std::stoi(item));
        record = {{"ids", ids}, {"variant", dec_variant}, {"level", dec_level},
                  {"L", dec_length ? dec_length : ids.size()}, {"prompt_length", dec_prompt_length}};
      }
      const auto seq = gp::sequence_from_record(record, vocab);
      const auto decoded = gp::decode(seq, vocab, canvas);
      if (g.machine()) {
        std::cout << json{{"prompt", decoded.prompt}, {"layout", gp::layout_to_record(decoded.layout, seq.variant)}}.dump()
                  << '\n';
      } else {
        std::cout << "prompt: " << decoded.prompt << '\n';
        const auto text = gp::serialize_layout(decoded.layout, seq.variant);
        if (!text.empty()) std::cout << text << '\n';
      }
    } else if (*eval_run) {
      bench.vocab = std::make_shared<const gp::Vocabulary>(load_vocabulary(g));
      bench.encode.level = level_from(eval_level);
      bench.encode.variant = variant_from(eval_variant);
      const auto report = gp::run_benchmark(eval_dataset, bench);
      if (g.machine()) {
        std::cout << gp::report_to_json(report).dump() << '\n';
      } else {
        std::cout << gp::report_to_text(report);
      }
    } else if (*dp_export) {
      dp_opts.sample.canvas = canvas;
      const auto samples = gp::read_ocr_samples(dp_input);
      const auto manifest = gp::export_dataset(samples, dp_output, dp_opts);
      if (g.machine()) {
        std::cout << gp::manifest_to_json(manifest, dp_opts).dump() << '\n';
      } else {
        std::cout << "wrote " << manifest.count << " records from a pool of " << manifest.pool << " samples ("
                  << manifest.rejected << " rejected)\n";
        for (const auto& s : manifest.splits) std::cout << "  " << s.file.string() << ": " << s.records << " records\n";
      }
    } else if (*serve) {
      svc.backend = svc_backend.backend();
      svc.canvas = canvas;
      svc.vocab = std::make_shared<const gp::Vocabulary>(load_vocabulary(g));
      if (!snapshot.empty()) svc.snapshot = snapshot;
      gp::Service service(svc);
      httplib::Server server;
      running_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      std::cerr << "listening on " << svc.host << ':' << svc.port << '\n';
      if (!gp::serve(service, server)) {
        std::cerr << "error: cannot bind " << svc.host << ':' << svc.port << '\n';
        return 1;
      }
    }
  } catch (const gp::error& e) {
    std::cerr << "error: " << gp::code_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
