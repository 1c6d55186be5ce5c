#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "glyphplan/error.hpp"

namespace glyphplan {

/// Byte-level byte-pair-merge tokenizer. Ids 0..255 are the single bytes, so
/// every input encodes losslessly; learned merges follow in rank order.
///
/// Text is first split into chunks: a run of non-space bytes together with
/// at most one leading space, or a lone space. Merges never cross chunks.
class BpeModel {
 public:
  using Merge = std::pair<std::string, std::string>;

  BpeModel() : BpeModel(byte_tokens(), {}) {}

  /// Validates consistency: unique non-empty tokens, every single byte
  /// present, every merge built from known tokens into a known token.
  BpeModel(std::vector<std::string> tokens, std::vector<Merge> merges)
      : tokens_(std::move(tokens)), merges_(std::move(merges)) {
    if (tokens_.empty()) throw error(errc::empty_vocabulary, "base vocabulary is empty");
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (tokens_[i].empty()) throw error(errc::vocabulary_format, "empty token surface", i);
      if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
        throw error(errc::vocabulary_format, "duplicate token surface '" + tokens_[i] + "'", i);
      }
    }
    for (int b = 0; b < 256; ++b) {
      if (!index_.contains(std::string(1, static_cast<char>(b)))) {
        throw error(errc::vocabulary_format, "missing byte token " + std::to_string(b));
      }
    }
    for (std::size_t r = 0; r < merges_.size(); ++r) {
      const auto& [a, b] = merges_[r];
      if (!index_.contains(a) || !index_.contains(b) || !index_.contains(a + b)) {
        throw error(errc::vocabulary_format, "merge " + std::to_string(r) + " references unknown token", r);
      }
      ranks_.emplace(merges_[r], r);
    }
  }

  static BpeModel byte_level() { return BpeModel(); }

  /// Learns up to `target_size - 256` merges from `corpus`. Ties between
  /// equally frequent pairs resolve to the lexicographically smallest pair.
  static BpeModel train(std::span<const std::string> corpus, std::size_t target_size) {
    std::map<std::string, std::int64_t> chunk_counts;
    for (const auto& text : corpus) {
      for (auto chunk : split_chunks(text)) ++chunk_counts[std::string(chunk)];
    }
    std::vector<std::pair<std::vector<std::string>, std::int64_t>> words;
    for (const auto& [chunk, count] : chunk_counts) {
      std::vector<std::string> symbols;
      for (char c : chunk) symbols.emplace_back(1, c);
      words.emplace_back(std::move(symbols), count);
    }

    auto tokens = byte_tokens();
    std::unordered_map<std::string, int> known;
    for (std::size_t i = 0; i < tokens.size(); ++i) known.emplace(tokens[i], static_cast<int>(i));
    std::vector<Merge> merges;

    while (tokens.size() < target_size) {
      std::map<Merge, std::int64_t> pairs;
      for (const auto& [symbols, count] : words) {
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) pairs[{symbols[i], symbols[i + 1]}] += count;
      }
      const Merge* best = nullptr;
      std::int64_t best_count = 1;
      for (const auto& [pair, count] : pairs) {
        if (count > best_count) {
          best = &pair;
          best_count = count;
        }
      }
      if (best == nullptr) break;
      const Merge merge = *best;
      const std::string joined = merge.first + merge.second;
      for (auto& [symbols, count] : words) apply_merge(symbols, merge);
      merges.push_back(merge);
      if (known.emplace(joined, static_cast<int>(tokens.size())).second) tokens.push_back(joined);
    }
    return BpeModel(std::move(tokens), std::move(merges));
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::vector<Merge>& merges() const noexcept { return merges_; }

  const std::string& surface(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }

  std::optional<int> find(std::string_view surface) const {
    auto it = index_.find(std::string(surface));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<int> encode(std::string_view text) const {
    std::vector<int> ids;
    for (auto chunk : split_chunks(text)) {
      std::vector<std::string> symbols;
      symbols.reserve(chunk.size());
      for (char c : chunk) symbols.emplace_back(1, c);
      while (symbols.size() > 1) {
        std::optional<std::size_t> best_rank;
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
          auto it = ranks_.find({symbols[i], symbols[i + 1]});
          if (it != ranks_.end() && (!best_rank || it->second < *best_rank)) best_rank = it->second;
        }
        if (!best_rank) break;
        apply_merge(symbols, merges_[*best_rank]);
      }
      for (const auto& s : symbols) ids.push_back(index_.at(s));
    }
    return ids;
  }

  std::string decode(std::span<const int> ids) const {
    std::string out;
    for (int id : ids) out += surface(id);
    return out;
  }

  // -------------------------------------------------------------------------
  // File format:
  //   #glyphplan-bpe v1
  //   #tokens <n>      followed by n escaped surfaces, one per line
  //   #merges <m>      followed by m lines "<left> <right>"
  // Escapes: "\\" backslash, "\s" space, "\xNN" any other byte outside 0x21..0x7E.

  void save(std::ostream& out) const {
    out << "#glyphplan-bpe v1\n#tokens " << tokens_.size() << '\n';
    for (const auto& t : tokens_) out << escape(t) << '\n';
    out << "#merges " << merges_.size() << '\n';
    for (const auto& [a, b] : merges_) out << escape(a) << ' ' << escape(b) << '\n';
  }

  static BpeModel load(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next = [&]() -> std::string& {
      if (!std::getline(in, line)) {
        throw error(errc::vocabulary_format, "unexpected end of vocabulary file at line " + std::to_string(line_no + 1));
      }
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    };
    if (next() != "#glyphplan-bpe v1") throw error(errc::vocabulary_format, "bad vocabulary header");
    const auto token_count = read_count(next(), "#tokens ", line_no);
    std::vector<std::string> tokens;
    tokens.reserve(token_count);
    for (std::size_t i = 0; i < token_count; ++i) tokens.push_back(unescape(next(), line_no));
    const auto merge_count = read_count(next(), "#merges ", line_no);
    std::vector<Merge> merges;
    merges.reserve(merge_count);
    for (std::size_t i = 0; i < merge_count; ++i) {
      const auto& l = next();
      const auto space = l.find(' ');
      if (space == std::string::npos || l.find(' ', space + 1) != std::string::npos) {
        throw error(errc::vocabulary_format, "bad merge at line " + std::to_string(line_no), line_no);
      }
      merges.emplace_back(unescape(l.substr(0, space), line_no), unescape(l.substr(space + 1), line_no));
    }
    return BpeModel(std::move(tokens), std::move(merges));
  }

  static BpeModel load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_error, "cannot open vocabulary file " + path);
    return load(in);
  }

  static std::vector<std::string_view> split_chunks(std::string_view text) {
    std::vector<std::string_view> chunks;
    std::size_t i = 0;
    while (i < text.size()) {
      std::size_t j = i;
      if (text[j] == ' ') {
        ++j;
        if (j == text.size() || text[j] == ' ') {
          chunks.push_back(text.substr(i, 1));
          i = j;
          continue;
        }
      }
      while (j < text.size() && text[j] != ' ') ++j;
      chunks.push_back(text.substr(i, j - i));
      i = j;
    }
    return chunks;
  }

  static std::string escape(std::string_view s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (char c : s) {
      const auto u = static_cast<unsigned char>(c);
      if (c == '\\') {
        out += "\\\\";
      } else if (c == ' ') {
        out += "\\s";
      } else if (u < 0x21 || u > 0x7E) {
        out += "\\x";
        out.push_back(hex[u >> 4]);
        out.push_back(hex[u & 0xF]);
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  static std::string unescape(std::string_view s, std::size_t line_no = 0) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '\\') {
        out.push_back(s[i]);
        continue;
      }
      if (i + 1 >= s.size()) throw error(errc::vocabulary_format, "dangling escape", line_no);
      const char e = s[++i];
      if (e == '\\') {
        out.push_back('\\');
      } else if (e == 's') {
        out.push_back(' ');
      } else if (e == 'x') {
        if (i + 2 >= s.size()) throw error(errc::vocabulary_format, "short hex escape", line_no);
        unsigned value = 0;
        auto [ptr, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, value, 16);
        if (ec != std::errc{} || ptr != s.data() + i + 3) {
          throw error(errc::vocabulary_format, "bad hex escape", line_no);
        }
        out.push_back(static_cast<char>(value));
        i += 2;
      } else {
        throw error(errc::vocabulary_format, "unknown escape", line_no);
      }
    }
    return out;
  }

 private:
  static std::vector<std::string> byte_tokens() {
    std::vector<std::string> tokens;
    tokens.reserve(256);
    for (int b = 0; b < 256; ++b) tokens.emplace_back(1, static_cast<char>(b));
    return tokens;
  }

  static void apply_merge(std::vector<std::string>& symbols, const Merge& merge) {
    std::size_t w = 0;
    for (std::size_t r = 0; r < symbols.size(); ++r) {
      if (r + 1 < symbols.size() && symbols[r] == merge.first && symbols[r + 1] == merge.second) {
        symbols[w++] = merge.first + merge.second;
        ++r;
      } else {
        if (w != r) symbols[w] = std::move(symbols[r]);
        ++w;
      }
    }
    symbols.resize(w);
  }

  static std::size_t read_count(const std::string& line, std::string_view prefix, std::size_t line_no) {
    if (!line.starts_with(prefix)) {
      throw error(errc::vocabulary_format, "expected '" + std::string(prefix) + "' at line " + std::to_string(line_no), line_no);
    }
    std::size_t n = 0;
    const auto* first = line.data() + prefix.size();
    auto [ptr, ec] = std::from_chars(first, line.data() + line.size(), n);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      throw error(errc::vocabulary_format, "bad count at line " + std::to_string(line_no), line_no);
    }
    return n;
  }

  std::vector<std::string> tokens_;
  std::vector<Merge> merges_;
  std::unordered_map<std::string, int> index_;
  std::map<Merge, std::size_t> ranks_;
};

}  // namespace glyphplan
