#pragma once

#include <algorithm>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "glyphplan/error.hpp"
#include "glyphplan/layout.hpp"
#include "glyphplan/record_io.hpp"
#include "glyphplan/tokenizer.hpp"

namespace glyphplan {

struct KeywordMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

struct BenchmarkRecord {
  std::string prompt;
  std::vector<std::string> gt_keywords;
  Layout pred_layout;
  std::optional<std::vector<BoxLTRB>> gt_boxes;
};

/// Harmonic mean, 0 when both inputs are 0.
constexpr double harmonic_mean(double p, double r) noexcept {
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

namespace detail {

inline std::string fold_case(std::string s) {
  for (auto& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

inline std::vector<std::string> keyword_bag(const std::vector<std::string>& words, bool case_sensitive) {
  std::vector<std::string> bag;
  bag.reserve(words.size());
  for (const auto& w : words) bag.push_back(case_sensitive ? w : fold_case(w));
  std::sort(bag.begin(), bag.end());
  return bag;
}

}  // namespace detail

struct KeywordCounts {
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t ground_truth = 0;
  bool exact = false;  // multisets equal
};

/// One-to-one exact matching between predicted line contents and ground-truth
/// keywords. Under exact-string scoring any maximal pairing is optimal, so
/// the match count is the multiset intersection size.
inline KeywordCounts match_keywords(const std::vector<std::string>& predicted,
                                    const std::vector<std::string>& ground_truth, bool case_sensitive = false) {
  const auto p = detail::keyword_bag(predicted, case_sensitive);
  const auto g = detail::keyword_bag(ground_truth, case_sensitive);
  KeywordCounts counts{0, p.size(), g.size(), p == g};
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < p.size() && j < g.size()) {
    if (p[i] == g[j]) {
      ++counts.matched;
      ++i;
      ++j;
    } else if (p[i] < g[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return counts;
}

inline std::vector<std::string> predicted_keywords(const Layout& layout) {
  std::vector<std::string> out;
  out.reserve(layout.lines.size());
  for (const auto& line : layout.lines) out.push_back(line.content);
  return out;
}

/// Micro-averaged precision and recall over all records; accuracy is the
/// fraction of records whose predicted multiset equals the ground truth.
/// A zero denominator yields 0.
inline KeywordMetrics keyword_metrics(const std::vector<BenchmarkRecord>& records, bool case_sensitive = false) {
  if (records.empty()) throw error(errc::empty_dataset, "no records to evaluate");
  std::size_t matched = 0, predicted = 0, truth = 0, exact = 0;
  for (const auto& r : records) {
    const auto c = match_keywords(predicted_keywords(r.pred_layout), r.gt_keywords, case_sensitive);
    matched += c.matched;
    predicted += c.predicted;
    truth += c.ground_truth;
    exact += c.exact ? 1 : 0;
  }
  KeywordMetrics m;
  m.accuracy = static_cast<double>(exact) / static_cast<double>(records.size());
  m.precision = predicted ? static_cast<double>(matched) / static_cast<double>(predicted) : 0.0;
  m.recall = truth ? static_cast<double>(matched) / static_cast<double>(truth) : 0.0;
  m.f_measure = harmonic_mean(m.precision, m.recall);
  return m;
}

/// Mean of per-layout maximum pairwise IoU over layouts with two or more
/// lines; empty when none qualifies. Lower is better.
inline std::optional<double> overlap_metric(const std::vector<Layout>& layouts) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& layout : layouts) {
    if (auto v = max_pairwise_iou(layout)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

struct DetectionMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t ground_truth = 0;
};

inline DetectionMetrics detection_from_counts(std::size_t matched, std::size_t predicted, std::size_t truth) {
  DetectionMetrics m{0.0, 0.0, 0.0, matched, predicted, truth};
  m.precision = predicted ? static_cast<double>(matched) / static_cast<double>(predicted) : 0.0;
  m.recall = truth ? static_cast<double>(matched) / static_cast<double>(truth) : 0.0;
  m.f_measure = harmonic_mean(m.precision, m.recall);
  return m;
}

inline constexpr double default_iou_threshold = 0.5;

namespace detail {

/// Count vector indexed by IoU tier (tier 0 = highest IoU), compared
/// lexicographically.
using TierVector = std::vector<int>;

inline bool tier_less(const TierVector& a, const TierVector& b) noexcept {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Matching that takes as many pairs as possible at the highest IoU, then as
/// many as possible at the next IoU, and so on. Solved as a min-cost flow
/// whose costs are tier vectors, by successive shortest paths.
inline std::size_t tiered_matching(std::size_t n_pred, std::size_t n_gt,
                                   const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>& edges,
                                   std::size_t tiers) {
  struct Arc {
    std::size_t to;
    int cap;
    TierVector cost;
  };
  const std::size_t source = n_pred + n_gt;
  const std::size_t sink = source + 1;
  const std::size_t n = sink + 1;
  std::vector<Arc> arcs;
  std::vector<std::vector<std::size_t>> out(n);
  auto add = [&](std::size_t a, std::size_t b, TierVector cost) {
    TierVector back(cost.size());
    for (std::size_t k = 0; k < cost.size(); ++k) back[k] = -cost[k];
    out[a].push_back(arcs.size());
    arcs.push_back({b, 1, std::move(cost)});
    out[b].push_back(arcs.size());
    arcs.push_back({a, 0, std::move(back)});
  };
  const TierVector zero(tiers, 0);
  for (std::size_t i = 0; i < n_pred; ++i) add(source, i, zero);
  for (std::size_t j = 0; j < n_gt; ++j) add(n_pred + j, sink, zero);
  for (const auto& [i, j, tier] : edges) {
    TierVector cost(tiers, 0);
    cost[tier] = -1;
    add(i, n_pred + j, std::move(cost));
  }

  std::size_t matched = 0;
  for (;;) {
    std::vector<std::optional<TierVector>> dist(n);
    std::vector<std::size_t> via(n, arcs.size());
    dist[source] = zero;
    for (std::size_t round = 0; round + 1 < n; ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < n; ++u) {
        if (!dist[u]) continue;
        for (auto a : out[u]) {
          if (arcs[a].cap == 0) continue;
          TierVector d = *dist[u];
          for (std::size_t k = 0; k < tiers; ++k) d[k] += arcs[a].cost[k];
          auto& target = dist[arcs[a].to];
          if (!target || tier_less(d, *target)) {
            target = std::move(d);
            via[arcs[a].to] = a;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    // Augment only while it strictly improves the tier counts.
    if (!dist[sink] || !tier_less(*dist[sink], zero)) break;
    for (std::size_t v = sink; v != source;) {
      const auto a = via[v];
      arcs[a].cap -= 1;
      arcs[a ^ 1].cap += 1;
      v = arcs[a ^ 1].to;
    }
    ++matched;
  }
  return matched;
}

}  // namespace detail

/// One-to-one matching of predicted to ground-truth boxes in descending IoU
/// order; a pair is eligible when its IoU reaches the threshold. With
/// distinct IoUs this is plain greedy pairing. Equal IoUs are resolved so the
/// most pairs form at each level, which keeps the result independent of
/// list order.
inline DetectionMetrics detection_match_metrics(const std::vector<BoxLTRB>& pred, const std::vector<BoxLTRB>& gt,
                                                double iou_threshold = default_iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw error(errc::invalid_argument, "IoU threshold must lie in (0, 1]");
  }
  std::vector<std::tuple<double, std::size_t, std::size_t>> eligible;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      const double iou = box_iou(pred[i], gt[j]);
      if (iou >= iou_threshold) eligible.emplace_back(iou, i, j);
    }
  }
  std::vector<double> levels;
  for (const auto& e : eligible) levels.push_back(std::get<0>(e));
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> edges;
  for (const auto& [iou, i, j] : eligible) {
    const auto tier = static_cast<std::size_t>(
        std::lower_bound(levels.begin(), levels.end(), iou, std::greater<>()) - levels.begin());
    edges.emplace_back(i, j, tier);
  }
  const auto matched = detail::tiered_matching(pred.size(), gt.size(), edges, levels.size());
  return detection_from_counts(matched, pred.size(), gt.size());
}

// ---------------------------------------------------------------------------
// Sequence length coverage

struct CoverageRow {
  std::size_t max_length = 0;
  std::size_t covered = 0;
  double fraction = 0.0;
};

struct CorpusEntry {
  std::string prompt;
  Layout layout;
};

/// Fraction of entries whose composed length fits within each L, rows in
/// ascending L.
inline std::vector<CoverageRow> coverage_from_lengths(std::vector<std::size_t> lengths, std::vector<std::size_t> limits) {
  if (lengths.empty()) throw error(errc::empty_dataset, "corpus is empty");
  std::sort(lengths.begin(), lengths.end());
  std::sort(limits.begin(), limits.end());
  limits.erase(std::unique(limits.begin(), limits.end()), limits.end());
  std::vector<CoverageRow> rows;
  for (auto limit : limits) {
    const auto covered = static_cast<std::size_t>(std::upper_bound(lengths.begin(), lengths.end(), limit) - lengths.begin());
    rows.push_back({limit, covered, static_cast<double>(covered) / static_cast<double>(lengths.size())});
  }
  return rows;
}

inline std::vector<CoverageRow> length_coverage(const std::vector<CorpusEntry>& corpus, const Vocabulary& vocab,
                                                const EncodeOptions& options, std::vector<std::size_t> limits) {
  std::vector<std::size_t> lengths;
  lengths.reserve(corpus.size());
  for (const auto& entry : corpus) lengths.push_back(composed_length(entry.prompt, entry.layout, vocab, options));
  return coverage_from_lengths(std::move(lengths), std::move(limits));
}

// ---------------------------------------------------------------------------
// Benchmark harness

struct BenchmarkConfig {
  double iou_threshold = default_iou_threshold;
  bool case_sensitive = false;
  std::vector<std::size_t> lengths{64, 128, 256};
  EncodeOptions encode;
  std::shared_ptr<const Vocabulary> vocab;  // byte-level base when unset
};

struct RecordDiagnostics {
  std::size_t line = 0;  // 1-based line in the dataset file
  KeywordCounts keywords;
  std::optional<double> max_iou;
  std::size_t composed_length = 0;
  std::optional<DetectionMetrics> detection;
};

struct MetricsReport {
  std::size_t records = 0;
  KeywordMetrics keywords;
  std::optional<double> overlap;
  std::optional<DetectionMetrics> detection;
  std::vector<CoverageRow> coverage;
  std::vector<RecordDiagnostics> diagnostics;
  BenchmarkConfig config;
};

inline BenchmarkRecord benchmark_record_from_json(const json& j) {
  BenchmarkRecord r;
  r.prompt = detail::require_string(j, "prompt");
  r.gt_keywords = detail::string_list(detail::require(j, "gt_keywords"), "gt_keywords");
  r.pred_layout = layout_from_record(j);
  if (j.contains("gt_boxes") && !j.at("gt_boxes").is_null()) {
    std::vector<BoxLTRB> boxes;
    for (const auto& b : j.at("gt_boxes")) boxes.push_back(rect_from_json(b));
    r.gt_boxes = std::move(boxes);
  }
  return r;
}

inline MetricsReport evaluate_records(const std::vector<BenchmarkRecord>& records, const std::vector<std::size_t>& lines,
                                      BenchmarkConfig config) {
  if (records.empty()) throw error(errc::empty_dataset, "dataset has no records");
  if (!config.vocab) config.vocab = std::make_shared<const Vocabulary>(BpeModel::byte_level(), false);
  MetricsReport report;
  report.records = records.size();
  report.keywords = keyword_metrics(records, config.case_sensitive);

  std::vector<Layout> layouts;
  std::vector<std::size_t> lengths;
  std::size_t det_matched = 0, det_pred = 0, det_gt = 0;
  bool any_boxes = false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    RecordDiagnostics d;
    d.line = i < lines.size() ? lines[i] : i + 1;
    d.keywords = match_keywords(predicted_keywords(r.pred_layout), r.gt_keywords, config.case_sensitive);
    d.max_iou = max_pairwise_iou(r.pred_layout);
    d.composed_length = composed_length(r.prompt, r.pred_layout, *config.vocab, config.encode);
    if (r.gt_boxes) {
      any_boxes = true;
      std::vector<BoxLTRB> pred;
      for (const auto& line : r.pred_layout.lines) pred.push_back(bounding_rect(line.box));
      d.detection = detection_match_metrics(pred, *r.gt_boxes, config.iou_threshold);
      det_matched += d.detection->matched;
      det_pred += d.detection->predicted;
      det_gt += d.detection->ground_truth;
    }
    layouts.push_back(r.pred_layout);
    lengths.push_back(d.composed_length);
    report.diagnostics.push_back(std::move(d));
  }
  report.overlap = overlap_metric(layouts);
  if (any_boxes) report.detection = detection_from_counts(det_matched, det_pred, det_gt);
  report.coverage = coverage_from_lengths(std::move(lengths), config.lengths);
  report.config = std::move(config);
  return report;
}

inline MetricsReport run_benchmark(std::istream& in, BenchmarkConfig config = {}) {
  std::vector<BenchmarkRecord> records;
  std::vector<std::size_t> lines;
  for_each_record(in, [&](const json& j, std::size_t line_no) {
    records.push_back(benchmark_record_from_json(j));
    lines.push_back(line_no);
  });
  return evaluate_records(records, lines, std::move(config));
}

inline MetricsReport run_benchmark(const std::string& path, BenchmarkConfig config = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::io_error, "cannot open dataset " + path);
  return run_benchmark(in, std::move(config));
}

inline json detection_to_json(const DetectionMetrics& d) {
  return {{"precision", d.precision}, {"recall", d.recall}, {"f_measure", d.f_measure},
          {"matched", d.matched},     {"predicted", d.predicted}, {"ground_truth", d.ground_truth}};
}

inline json report_to_json(const MetricsReport& report) {
  json coverage = json::array();
  for (const auto& row : report.coverage) {
    coverage.push_back({{"L", row.max_length}, {"covered", row.covered}, {"fraction", row.fraction}});
  }
  json records = json::array();
  for (const auto& d : report.diagnostics) {
    json r{{"line", d.line},
           {"matched", d.keywords.matched},
           {"predicted", d.keywords.predicted},
           {"ground_truth", d.keywords.ground_truth},
           {"exact", d.keywords.exact},
           {"max_iou", d.max_iou ? json(*d.max_iou) : json(nullptr)},
           {"composed_length", d.composed_length}};
    if (d.detection) r["detection"] = detection_to_json(*d.detection);
    records.push_back(std::move(r));
  }
  return {{"records", report.records},
          {"conventions",
           {{"averaging", "micro"},
            {"keyword_match", report.config.case_sensitive ? "case-sensitive exact" : "case-insensitive exact"},
            {"iou_threshold", report.config.iou_threshold},
            {"detection_match", "descending IoU, most pairs at each IoU level"},
            {"overlap", "mean of per-layout max pairwise IoU over layouts with >= 2 lines"}}},
          {"keywords",
           {{"accuracy", report.keywords.accuracy},
            {"precision", report.keywords.precision},
            {"recall", report.keywords.recall},
            {"f_measure", report.keywords.f_measure}}},
          {"overlap", report.overlap ? json(*report.overlap) : json(nullptr)},
          {"detection", report.detection ? detection_to_json(*report.detection) : json(nullptr)},
          {"length_coverage", std::move(coverage)},
          {"per_record", std::move(records)}};
}

inline std::string report_to_text(const MetricsReport& report) {
  std::ostringstream out;
  char buf[160];
  out << "records: " << report.records << " (micro-averaged, "
      << (report.config.case_sensitive ? "case-sensitive" : "case-insensitive") << " keyword match)\n";
  std::snprintf(buf, sizeof buf, "keywords  acc %.4f  P %.4f  R %.4f  F %.4f\n", report.keywords.accuracy,
                report.keywords.precision, report.keywords.recall, report.keywords.f_measure);
  out << buf;
  if (report.overlap) {
    std::snprintf(buf, sizeof buf, "max-IoU   %.4f\n", *report.overlap);
    out << buf;
  } else {
    out << "max-IoU   n/a (no layout with two or more lines)\n";
  }
  if (report.detection) {
    std::snprintf(buf, sizeof buf, "detection P %.4f  R %.4f  F %.4f  (IoU >= %.2f)\n", report.detection->precision,
                  report.detection->recall, report.detection->f_measure, report.config.iou_threshold);
    out << buf;
  }
  for (const auto& row : report.coverage) {
    std::snprintf(buf, sizeof buf, "L=%-5zu covers %.4f (%zu/%zu)\n", row.max_length, row.fraction, row.covered,
                  report.records);
    out << buf;
  }
  return out.str();
}

}  // namespace glyphplan
