#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace glyphplan {

enum class errc {
  invalid_argument,
  invalid_request,
  incompatible_repr,
  malformed_line,
  angle_out_of_range,
  non_alphabet_symbol,
  empty_vocabulary,
  vocabulary_conflict,
  vocabulary_format,
  sequence_too_long,
  structure_error,
  layout_infeasible,
  backend_unreachable,
  backend_malformed,
  timeout,
  index_out_of_range,
  invalid_box,
  empty_content,
  invalid_content,
  nothing_to_undo,
  invalid_command,
  session_not_found,
  empty_dataset,
  dataset_parse_error,
  rejected_sample,
  insufficient_samples,
  io_error,
};

/// Stable snake_case identifier used in machine-readable error bodies.
constexpr std::string_view code_name(errc code) noexcept {
  switch (code) {
    case errc::invalid_argument: return "invalid_argument";
    case errc::invalid_request: return "invalid_request";
    case errc::incompatible_repr: return "incompatible_repr";
    case errc::malformed_line: return "malformed_line";
    case errc::angle_out_of_range: return "angle_out_of_range";
    case errc::non_alphabet_symbol: return "non_alphabet_symbol";
    case errc::empty_vocabulary: return "empty_vocabulary";
    case errc::vocabulary_conflict: return "vocabulary_conflict";
    case errc::vocabulary_format: return "vocabulary_format";
    case errc::sequence_too_long: return "sequence_too_long";
    case errc::structure_error: return "structure_error";
    case errc::layout_infeasible: return "layout_infeasible";
    case errc::backend_unreachable: return "backend_unreachable";
    case errc::backend_malformed: return "backend_malformed";
    case errc::timeout: return "timeout";
    case errc::index_out_of_range: return "index_out_of_range";
    case errc::invalid_box: return "invalid_box";
    case errc::empty_content: return "empty_content";
    case errc::invalid_content: return "invalid_content";
    case errc::nothing_to_undo: return "nothing_to_undo";
    case errc::invalid_command: return "invalid_command";
    case errc::session_not_found: return "session_not_found";
    case errc::empty_dataset: return "empty_dataset";
    case errc::dataset_parse_error: return "dataset_parse_error";
    case errc::rejected_sample: return "rejected_sample";
    case errc::insufficient_samples: return "insufficient_samples";
    case errc::io_error: return "io_error";
  }
  return "unknown";
}

/// Base exception for every failure raised by the library. `index` carries
/// the offending line, record, or symbol position when one exists.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), code_(code), index_(index) {}

  errc code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  errc code_;
  std::optional<std::size_t> index_;
};

class malformed_line : public error {
 public:
  malformed_line(std::size_t line, std::string reason)
      : error(errc::malformed_line,
              "malformed line " + std::to_string(line) + ": " + reason, line),
        reason_(std::move(reason)) {}

  std::size_t line() const noexcept { return *index(); }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

class sequence_too_long : public error {
 public:
  sequence_too_long(std::size_t required, std::size_t limit)
      : error(errc::sequence_too_long,
              "composed sequence needs " + std::to_string(required) +
                  " tokens but the limit is " + std::to_string(limit)),
        required_(required), limit_(limit) {}

  std::size_t required() const noexcept { return required_; }
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t required_;
  std::size_t limit_;
};

}  // namespace glyphplan
