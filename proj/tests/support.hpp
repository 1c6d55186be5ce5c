#pragma once

// Random generators and independent reference computations shared by the unit
// tests and the acceptance binary. Nothing here calls the library function it
// is used to check.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "glyphplan/glyphplan.hpp"

namespace testsupport {

namespace gp = glyphplan;

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

inline char printable(Rng& rng) { return static_cast<char>(uniform(rng, 32, 126)); }

/// Alphabet-only text with no leading/trailing space. With `rich`, internal
/// spaces, digits and commas appear often. Never ends in a comma, the one
/// shape the grammar leaves ambiguous next to a coordinate group.
inline std::string random_content(Rng& rng, std::size_t max_len = 12, bool rich = true) {
  const std::size_t n = static_cast<std::size_t>(uniform(rng, 1, static_cast<int>(max_len)));
  std::string s;
  while (s.size() < n) {
    const int pick = uniform(rng, 0, 9);
    if (rich && pick == 0) {
      s += ' ';
    } else if (rich && pick <= 2) {
      s += static_cast<char>('0' + uniform(rng, 0, 9));
    } else if (rich && pick == 3) {
      s += ',';
    } else {
      s += printable(rng);
    }
  }
  while (!s.empty() && (s.front() == ' ')) s.erase(s.begin());
  while (!s.empty() && (s.back() == ' ' || s.back() == ',')) s.pop_back();
  if (s.empty()) s = std::string(1, static_cast<char>(uniform(rng, 'A', 'Z')));
  return s;
}

inline gp::BoxLTRB random_rect(Rng& rng, int side, bool allow_degenerate = true) {
  int l = uniform(rng, 0, side), r = uniform(rng, 0, side);
  int t = uniform(rng, 0, side), b = uniform(rng, 0, side);
  if (l > r) std::swap(l, r);
  if (t > b) std::swap(t, b);
  if (!allow_degenerate) {
    if (l == r) (r < side ? ++r : --l);
    if (t == b) (b < side ? ++b : --t);
  }
  return {l, t, r, b};
}

inline long long quad_area2(const gp::QuadBox& q) {
  long long s = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& a = q.vertices[i];
    const auto& b = q.vertices[(i + 1) % 4];
    s += static_cast<long long>(a.x) * b.y - static_cast<long long>(b.x) * a.y;
  }
  return s;
}

/// A box of the given variant with every coordinate in [0, hi].
inline gp::BoxRepr random_box(Rng& rng, gp::ReprVariant v, int hi) {
  switch (v) {
    case gp::ReprVariant::ltrb: return random_rect(rng, hi);
    case gp::ReprVariant::center: return gp::CenterPoint{{uniform(rng, 0, hi), uniform(rng, 0, hi)}};
    case gp::ReprVariant::top_left: return gp::TopLeftPoint{{uniform(rng, 0, hi), uniform(rng, 0, hi)}};
    case gp::ReprVariant::ltrb_angle: return gp::AngledBox{random_rect(rng, hi), uniform(rng, -90, 90)};
    case gp::ReprVariant::quad:
      for (;;) {
        const auto r = random_rect(rng, hi, false);
        gp::QuadBox q{{gp::Point{r.left, r.top}, gp::Point{r.right, r.top}, gp::Point{r.right, r.bottom},
                       gp::Point{r.left, r.bottom}}};
        for (auto& p : q.vertices) {
          p.x = std::clamp(p.x + uniform(rng, -3, 3), 0, hi);
          p.y = std::clamp(p.y + uniform(rng, -3, 3), 0, hi);
        }
        if (quad_area2(q) > 0) return q;
      }
  }
  return gp::BoxLTRB{};
}

inline gp::Layout random_layout(Rng& rng, gp::ReprVariant v, std::size_t max_lines, int coord_hi = 128,
                                bool rich = true, std::size_t max_content = 12) {
  gp::Layout layout;
  const auto n = static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(max_lines)));
  for (std::size_t i = 0; i < n; ++i) {
    layout.lines.push_back({random_content(rng, max_content, rich), random_box(rng, v, coord_hi)});
  }
  return layout;
}

/// Prompt of printable ASCII words (byte-level subword base: one id per byte).
inline std::string random_prompt(Rng& rng, std::size_t max_len = 24) {
  const auto n = static_cast<std::size_t>(uniform(rng, 1, static_cast<int>(max_len)));
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += coin(rng, 0.15) ? ' ' : printable(rng);
  return s;
}

/// A prompt the planner accepts: at least one non-space symbol.
inline std::string random_request_prompt(Rng& rng, std::size_t max_len = 24) {
  for (;;) {
    auto s = random_prompt(rng, max_len);
    if (s.find_first_not_of(' ') != std::string::npos) return s;
  }
}

// ---------------------------------------------------------------------------
// Oracles

/// Unit cells covered by both rectangles / by either, counted one by one.
inline double cell_count_iou(const gp::BoxLTRB& a, const gp::BoxLTRB& b) {
  const int x0 = std::min(a.left, b.left), x1 = std::max(a.right, b.right);
  const int y0 = std::min(a.top, b.top), y1 = std::max(a.bottom, b.bottom);
  long long inter = 0, uni = 0;
  for (int x = x0; x < x1; ++x) {
    for (int y = y0; y < y1; ++y) {
      const bool in_a = x >= a.left && x < a.right && y >= a.top && y < a.bottom;
      const bool in_b = x >= b.left && x < b.right && y >= b.top && y < b.bottom;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Exact IoU as an (intersection, union) integer pair.
struct Ratio {
  long long num = 0;
  long long den = 0;

  bool at_least(const Ratio& o) const { return den == 0 ? o.num == 0 : num * o.den >= o.num * den; }
  friend bool operator==(const Ratio& a, const Ratio& b) { return a.num * b.den == b.num * a.den; }
  friend bool operator>(const Ratio& a, const Ratio& b) { return a.num * b.den > b.num * a.den; }
};

inline Ratio exact_iou(const gp::BoxLTRB& a, const gp::BoxLTRB& b) {
  const long long iw = std::max(0, std::min(a.right, b.right) - std::max(a.left, b.left));
  const long long ih = std::max(0, std::min(a.bottom, b.bottom) - std::max(a.top, b.top));
  const long long inter = iw * ih;
  const long long area_a = static_cast<long long>(a.right - a.left) * (a.bottom - a.top);
  const long long area_b = static_cast<long long>(b.right - b.left) * (b.bottom - b.top);
  const long long uni = area_a + area_b - inter;
  return uni == 0 ? Ratio{0, 1} : Ratio{inter, uni};
}

/// Enumerates every one-to-one matching over eligible pairs and keeps the one
/// whose IoUs, sorted descending, are lexicographically largest (a longer list
/// wins on an equal prefix). Returns its size.
inline std::size_t brute_force_detection(const std::vector<gp::BoxLTRB>& pred, const std::vector<gp::BoxLTRB>& gt,
                                         const Ratio& threshold) {
  std::vector<Ratio> best;
  std::vector<bool> gt_used(gt.size(), false);
  std::vector<Ratio> current;
  auto better = [](std::vector<Ratio> a, std::vector<Ratio> b) {
    auto desc = [](const Ratio& x, const Ratio& y) { return x > y; };
    std::sort(a.begin(), a.end(), desc);
    std::sort(b.begin(), b.end(), desc);
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
      if (a[i] > b[i]) return true;
      if (b[i] > a[i]) return false;
    }
    return a.size() > b.size();
  };
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == pred.size()) {
      if (better(current, best)) best = current;
      return;
    }
    self(self, i + 1);  // pred i unmatched
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (gt_used[j]) continue;
      const auto r = exact_iou(pred[i], gt[j]);
      if (!r.at_least(threshold)) continue;
      gt_used[j] = true;
      current.push_back(r);
      self(self, i + 1);
      current.pop_back();
      gt_used[j] = false;
    }
  };
  rec(rec, 0);
  return best.size();
}

inline std::string lower(std::string s) {
  for (auto& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

/// Largest one-to-one pairing of equal strings, by exhaustive search.
inline std::size_t brute_force_keyword_matches(const std::vector<std::string>& pred,
                                               const std::vector<std::string>& gt, bool case_sensitive) {
  std::vector<bool> used(gt.size(), false);
  std::size_t best = 0;
  auto key = [&](const std::string& s) { return case_sensitive ? s : lower(s); };
  auto rec = [&](auto&& self, std::size_t i, std::size_t count) -> void {
    if (i == pred.size()) {
      best = std::max(best, count);
      return;
    }
    self(self, i + 1, count);
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (used[j] || key(pred[i]) != key(gt[j])) continue;
      used[j] = true;
      self(self, i + 1, count + 1);
      used[j] = false;
    }
  };
  rec(rec, 0, 0);
  return best;
}

/// Multiset equality by trying every permutation-free pairing.
inline bool same_multiset(std::vector<std::string> a, std::vector<std::string> b, bool case_sensitive) {
  if (a.size() != b.size()) return false;
  return brute_force_keyword_matches(a, b, case_sensitive) == a.size();
}

struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("glyphplan-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

/// Trained base whose chunks "a" and " sign" are single tokens.
inline gp::BpeModel sign_model() {
  std::vector<std::string> corpus(4, "a sign");
  return gp::BpeModel::train(corpus, 256 + 4);
}

}  // namespace testsupport
