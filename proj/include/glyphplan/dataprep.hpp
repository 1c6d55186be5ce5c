#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "glyphplan/alphabet.hpp"
#include "glyphplan/error.hpp"
#include "glyphplan/grammar.hpp"
#include "glyphplan/layout.hpp"
#include "glyphplan/record_io.hpp"

namespace glyphplan {

struct OcrLine {
  std::string text;
  BoxLTRB box;  // source pixels
};

struct OcrSample {
  std::string caption;
  std::vector<OcrLine> ocr_lines;
  int image_side = 512;
  std::optional<int> image_width;  // non-square sources
  std::optional<int> image_height;

  int width() const noexcept { return image_width.value_or(image_side); }
  int height() const noexcept { return image_height.value_or(image_side); }
};

struct InstructionPair {
  std::string input;
  std::string target;

  friend bool operator==(const InstructionPair&, const InstructionPair&) = default;
};

/// Pair 0 omits keywords, pair 1 lists every OCR text in source order; both
/// share the same target.
using SamplePairs = std::array<InstructionPair, 2>;

struct SampleOptions {
  Canvas canvas;
  bool keep_empty = false;  // emit an empty target for samples without OCR lines
};

inline Layout sample_layout(const OcrSample& sample, const Canvas& canvas) {
  const int w = sample.width();
  const int h = sample.height();
  if (w <= 0 || h <= 0) throw error(errc::rejected_sample, "image size must be positive");
  Layout layout;
  layout.canvas = canvas;
  for (std::size_t i = 0; i < sample.ocr_lines.size(); ++i) {
    const auto& line = sample.ocr_lines[i];
    const auto& b = line.box;
    if (b.left < 0 || b.top < 0 || b.right > w || b.bottom > h || b.left > b.right || b.top > b.bottom) {
      throw error(errc::rejected_sample, "OCR box " + std::to_string(i) + " lies outside the image", i);
    }
    auto text = alphabet::canonicalize(line.text);
    if (text.empty()) throw error(errc::rejected_sample, "OCR text " + std::to_string(i) + " is empty", i);
    if (auto pos = alphabet::first_foreign(text)) {
      throw error(errc::rejected_sample, "OCR text " + std::to_string(i) + " has a non-alphabet symbol at position " +
                                             std::to_string(*pos), i);
    }
    layout.lines.push_back({std::move(text), normalize_box(b, w, h, canvas)});
  }
  return layout;
}

inline SamplePairs sample_to_pairs(const OcrSample& sample, const SampleOptions& options = {}) {
  if (sample.ocr_lines.empty() && !options.keep_empty) {
    throw error(errc::rejected_sample, "sample has no OCR lines");
  }
  const Layout layout = sample_layout(sample, options.canvas);
  const std::string target = serialize_layout(layout, ReprVariant::ltrb);

  // Content whose tail looks like a coordinate group would not read back.
  const auto reparsed = parse_layout(target, ReprVariant::ltrb, options.canvas, ParseMode::lenient);
  if (!reparsed.warnings.empty() || reparsed.layout != layout) {
    throw error(errc::rejected_sample, "serialized target does not parse back unchanged");
  }

  PlannerPrompt plain;
  plain.prompt = sample.caption;
  PlannerPrompt keyed = plain;
  if (!layout.lines.empty()) {
    std::vector<std::string> keywords;
    for (const auto& line : layout.lines) keywords.push_back(line.content);
    keyed.keywords = std::move(keywords);
  }
  return {InstructionPair{build_planner_prompt(plain), target}, InstructionPair{build_planner_prompt(keyed), target}};
}

inline OcrSample ocr_sample_from_json(const json& j) {
  OcrSample s;
  s.caption = detail::require_string(j, "caption");
  const auto& ocr = detail::require(j, "ocr");
  if (!ocr.is_array()) throw error(errc::invalid_argument, "ocr must be an array");
  for (const auto& line : ocr) {
    s.ocr_lines.push_back({detail::require_string(line, "text"), rect_from_json(detail::require(line, "box"))});
  }
  if (j.contains("image_side")) s.image_side = j.at("image_side").get<int>();
  if (j.contains("image_width")) s.image_width = j.at("image_width").get<int>();
  if (j.contains("image_height")) s.image_height = j.at("image_height").get<int>();
  return s;
}

inline std::vector<OcrSample> read_ocr_samples(const std::string& path) {
  std::vector<OcrSample> samples;
  for_each_record(path, [&](const json& j, std::size_t) { samples.push_back(ocr_sample_from_json(j)); });
  return samples;
}

// ---------------------------------------------------------------------------
// Export

struct ExportOptions {
  std::vector<std::size_t> splits;  // samples per split; empty exports the whole pool
  std::uint64_t seed = 0;
  bool allow_overlap = false;       // splits drawn as nested prefixes of one shuffle
  SampleOptions sample;
};

struct SplitManifest {
  std::string name;
  std::size_t samples = 0;
  std::size_t records = 0;
  std::filesystem::path file;
};

struct ExportManifest {
  std::size_t pool = 0;
  std::size_t rejected = 0;
  std::map<std::string, std::size_t> rejected_reasons;
  std::size_t count = 0;  // records written over all splits
  std::vector<SplitManifest> splits;
  std::uint64_t seed = 0;
};

inline json manifest_to_json(const ExportManifest& m, const ExportOptions& options) {
  json splits = json::array();
  for (const auto& s : m.splits) {
    splits.push_back({{"name", s.name}, {"samples", s.samples}, {"records", s.records}, {"file", s.file.filename().string()}});
  }
  return {{"serializer_version", std::string(serializer_version)},
          {"task_description", "v1"},
          {"seed", m.seed},
          {"canvas", options.sample.canvas.side},
          {"allow_overlap", options.allow_overlap},
          {"pool", m.pool},
          {"rejected", m.rejected},
          {"rejected_reasons", m.rejected_reasons},
          {"count", m.count},
          {"splits", std::move(splits)}};
}

namespace detail {

inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw error(errc::io_error, "cannot write " + path.string());
  return out;
}

}  // namespace detail

/// Writes one `train_<size>.jsonl` per split (or `train_all.jsonl`) of
/// {input, target} records plus `manifest.json` into `output_dir`. Samples
/// that fail conversion are left out of the pool and counted in the manifest.
inline ExportManifest export_dataset(const std::vector<OcrSample>& samples, const std::filesystem::path& output_dir,
                                     const ExportOptions& options = {}) {
  ExportManifest manifest;
  manifest.seed = options.seed;
  std::vector<SamplePairs> pool;
  for (const auto& sample : samples) {
    try {
      pool.push_back(sample_to_pairs(sample, options.sample));
    } catch (const error& e) {
      ++manifest.rejected;
      ++manifest.rejected_reasons[std::string(code_name(e.code())) + ": " +
                                  (sample.ocr_lines.empty() ? "no OCR lines" : "invalid OCR content")];
    }
  }
  manifest.pool = pool.size();

  std::vector<std::pair<std::string, std::size_t>> plan;
  if (options.splits.empty()) {
    plan.emplace_back("all", pool.size());
  } else {
    for (auto n : options.splits) plan.emplace_back(std::to_string(n), n);
  }
  std::size_t needed = 0;
  for (const auto& [name, n] : plan) needed = options.allow_overlap ? std::max(needed, n) : needed + n;
  if (needed > pool.size()) {
    throw error(errc::insufficient_samples, "splits need " + std::to_string(needed) + " samples but the pool has " +
                                                std::to_string(pool.size()));
  }

  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) throw error(errc::io_error, "cannot create " + output_dir.string() + ": " + ec.message());

  const auto order = detail::seeded_permutation(pool.size(), options.seed);
  std::size_t cursor = 0;
  for (const auto& [name, n] : plan) {
    const std::size_t begin = options.allow_overlap ? 0 : cursor;
    SplitManifest split{name, n, 0, output_dir / ("train_" + name + ".jsonl")};
    auto out = detail::open_output(split.file);
    for (std::size_t k = begin; k < begin + n; ++k) {
      for (const auto& pair : pool[order[k]]) {
        out << json{{"input", pair.input}, {"target", pair.target}}.dump() << '\n';
        ++split.records;
      }
    }
    if (!out) throw error(errc::io_error, "write failed for " + split.file.string());
    cursor += n;
    manifest.count += split.records;
    manifest.splits.push_back(std::move(split));
  }

  auto out = detail::open_output(output_dir / "manifest.json");
  out << manifest_to_json(manifest, options).dump(2) << '\n';
  if (!out) throw error(errc::io_error, "write failed for " + (output_dir / "manifest.json").string());
  return manifest;
}

}  // namespace glyphplan
