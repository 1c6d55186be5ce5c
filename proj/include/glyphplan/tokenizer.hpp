#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "glyphplan/alphabet.hpp"
#include "glyphplan/bpe.hpp"
#include "glyphplan/error.hpp"
#include "glyphplan/layout.hpp"

namespace glyphplan {

inline constexpr int coordinate_bins = 128;
inline constexpr std::size_t angle_token_count = max_angle - min_angle + 1;
inline constexpr std::size_t default_max_length = 128;
inline constexpr std::size_t quad_max_length = 256;

static_assert(angle_token_count == 181);

/// Sequence budget suited to a representation: quads need eight coordinates
/// per line and get the longer limit.
constexpr std::size_t default_length_for(ReprVariant v) noexcept {
  return v == ReprVariant::quad ? quad_max_length : default_max_length;
}

enum class TokenizationLevel { char_level, subword_level };

constexpr std::string_view level_name(TokenizationLevel level) noexcept {
  return level == TokenizationLevel::char_level ? "char" : "subword";
}

inline std::optional<TokenizationLevel> parse_level_name(std::string_view name) noexcept {
  if (name == "char") return TokenizationLevel::char_level;
  if (name == "subword") return TokenizationLevel::subword_level;
  return std::nullopt;
}

struct TokenKind {
  enum class Tag { subword, character, coord_x, coord_y, angle, eos, pad };

  Tag tag = Tag::pad;
  int value = 0;  // subword id, character code, coordinate bin, or angle

  static TokenKind subword(int id) { return {Tag::subword, id}; }
  static TokenKind character(char c) { return {Tag::character, static_cast<unsigned char>(c)}; }
  static TokenKind coord_x(int bin) { return {Tag::coord_x, bin}; }
  static TokenKind coord_y(int bin) { return {Tag::coord_y, bin}; }
  static TokenKind angle(int degrees) { return {Tag::angle, degrees}; }
  static TokenKind eos() { return {Tag::eos, 0}; }
  static TokenKind pad() { return {Tag::pad, 0}; }

  bool is_coordinate() const noexcept { return tag == Tag::coord_x || tag == Tag::coord_y; }

  friend bool operator==(const TokenKind&, const TokenKind&) = default;
};

/// Base subword ids followed by the special tokens, in this order:
/// 128 x-coordinates, 128 y-coordinates, 95 characters, eos, pad, and the
/// 181 angles when enabled.
class Vocabulary {
 public:
  static constexpr std::size_t coordinate_token_count = 2 * coordinate_bins;
  static constexpr std::size_t character_token_count = alphabet::size;

  explicit Vocabulary(BpeModel base, bool enable_angle = false)
      : base_(std::make_shared<const BpeModel>(std::move(base))), angle_(enable_angle) {
    for (std::size_t i = 0; i < special_count(); ++i) {
      const auto s = special_surface(i);
      if (base_->find(s)) throw error(errc::vocabulary_conflict, "base vocabulary already defines '" + s + "'");
    }
  }

  std::size_t base_size() const noexcept { return base_->size(); }
  std::size_t special_count() const noexcept {
    return coordinate_token_count + character_token_count + 2 + (angle_ ? angle_token_count : 0);
  }
  std::size_t size() const noexcept { return base_size() + special_count(); }
  bool angle_enabled() const noexcept { return angle_; }
  const BpeModel& base() const noexcept { return *base_; }

  int id_of(TokenKind kind) const {
    const int b = static_cast<int>(base_size());
    switch (kind.tag) {
      case TokenKind::Tag::subword:
        check(kind.value >= 0 && kind.value < b, "subword id out of range");
        return kind.value;
      case TokenKind::Tag::coord_x:
        check(kind.value >= 0 && kind.value < coordinate_bins, "x bin out of range");
        return b + kind.value;
      case TokenKind::Tag::coord_y:
        check(kind.value >= 0 && kind.value < coordinate_bins, "y bin out of range");
        return b + coordinate_bins + kind.value;
      case TokenKind::Tag::character:
        check(alphabet::contains(static_cast<char>(kind.value)), "character outside alphabet");
        return b + 2 * coordinate_bins + static_cast<int>(alphabet::ordinal(static_cast<char>(kind.value)));
      case TokenKind::Tag::eos: return b + eos_offset();
      case TokenKind::Tag::pad: return b + eos_offset() + 1;
      case TokenKind::Tag::angle:
        check(angle_, "angle tokens are not enabled");
        check(kind.value >= min_angle && kind.value <= max_angle, "angle out of range");
        return b + eos_offset() + 2 + (kind.value - min_angle);
    }
    return -1;
  }

  TokenKind kind_of(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= size()) {
      throw error(errc::structure_error, "token id " + std::to_string(id) + " outside vocabulary");
    }
    const int b = static_cast<int>(base_size());
    if (id < b) return TokenKind::subword(id);
    return special_kind(static_cast<std::size_t>(id - b));
  }

  std::string surface(int id) const {
    const auto kind = kind_of(id);
    if (kind.tag == TokenKind::Tag::subword) return base_->surface(id);
    return special_surface(static_cast<std::size_t>(id) - base_size());
  }

 private:
  static int eos_offset() noexcept {
    return static_cast<int>(coordinate_token_count + character_token_count);
  }

  static void check(bool ok, const char* what) {
    if (!ok) throw error(errc::structure_error, what);
  }

  TokenKind special_kind(std::size_t offset) const {
    if (offset < coordinate_bins) return TokenKind::coord_x(static_cast<int>(offset));
    if (offset < coordinate_token_count) return TokenKind::coord_y(static_cast<int>(offset - coordinate_bins));
    if (offset < coordinate_token_count + character_token_count) {
      return TokenKind::character(alphabet::symbol(offset - coordinate_token_count));
    }
    const auto eos = static_cast<std::size_t>(eos_offset());
    if (offset == eos) return TokenKind::eos();
    if (offset == eos + 1) return TokenKind::pad();
    return TokenKind::angle(static_cast<int>(offset - eos - 2) + min_angle);
  }

  std::string special_surface(std::size_t offset) const {
    const auto kind = special_kind(offset);
    switch (kind.tag) {
      case TokenKind::Tag::coord_x: return "[x" + std::to_string(kind.value) + "]";
      case TokenKind::Tag::coord_y: return "[y" + std::to_string(kind.value) + "]";
      case TokenKind::Tag::character: return std::string("[") + static_cast<char>(kind.value) + "]";
      case TokenKind::Tag::angle: return "[a" + std::to_string(kind.value) + "]";
      case TokenKind::Tag::eos: return "<eos>";
      case TokenKind::Tag::pad: return "<pad>";
      case TokenKind::Tag::subword: break;
    }
    return {};
  }

  std::shared_ptr<const BpeModel> base_;
  bool angle_;
};

inline Vocabulary build_vocabulary(BpeModel base, bool enable_angle) {
  return Vocabulary(std::move(base), enable_angle);
}

struct TokenSequence {
  std::vector<int> ids;
  std::vector<TokenKind> kinds;
  std::size_t max_length = default_max_length;
  ReprVariant variant = ReprVariant::ltrb;
  TokenizationLevel level = TokenizationLevel::char_level;
  std::size_t prompt_length = 0;
};

struct EncodeOptions {
  TokenizationLevel level = TokenizationLevel::char_level;
  ReprVariant variant = ReprVariant::ltrb;
  std::size_t max_length = default_max_length;
};

inline std::vector<TokenKind> tokenize_keyword(std::string_view word, TokenizationLevel level,
                                               const Vocabulary& vocab) {
  if (word.empty()) throw error(errc::empty_content, "keyword is empty");
  if (auto pos = alphabet::first_foreign(word)) {
    throw error(errc::non_alphabet_symbol, "non-alphabet symbol at position " + std::to_string(*pos), *pos);
  }
  std::vector<TokenKind> out;
  if (level == TokenizationLevel::char_level) {
    out.reserve(word.size());
    for (char c : word) out.push_back(TokenKind::character(c));
  } else {
    for (int id : vocab.base().encode(word)) out.push_back(TokenKind::subword(id));
  }
  return out;
}

/// Grid value to coordinate bin; the far edge (canvas side) shares the last bin.
constexpr int coordinate_bin(int value) noexcept {
  return value < 0 ? 0 : (value >= coordinate_bins ? coordinate_bins - 1 : value);
}

inline std::vector<TokenKind> coordinate_tokens(const BoxRepr& box) {
  std::vector<TokenKind> out;
  auto point = [&](int x, int y) {
    out.push_back(TokenKind::coord_x(coordinate_bin(x)));
    out.push_back(TokenKind::coord_y(coordinate_bin(y)));
  };
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, BoxLTRB>) {
          point(b.left, b.top);
          point(b.right, b.bottom);
        } else if constexpr (std::is_same_v<T, CenterPoint> || std::is_same_v<T, TopLeftPoint>) {
          point(b.at.x, b.at.y);
        } else if constexpr (std::is_same_v<T, AngledBox>) {
          point(b.rect.left, b.rect.top);
          point(b.rect.right, b.rect.bottom);
          out.push_back(TokenKind::angle(std::clamp(b.angle, min_angle, max_angle)));
        } else {
          for (const auto& v : b.vertices) point(v.x, v.y);
        }
      },
      box);
  return out;
}

namespace detail {

inline std::vector<TokenKind> compose(std::string_view prompt, const Layout& layout,
                                      const Vocabulary& vocab, const EncodeOptions& options,
                                      std::size_t& prompt_length) {
  std::vector<TokenKind> kinds;
  for (int id : vocab.base().encode(prompt)) kinds.push_back(TokenKind::subword(id));
  prompt_length = kinds.size();
  for (std::size_t i = 0; i < layout.lines.size(); ++i) {
    const auto& line = layout.lines[i];
    auto keyword = tokenize_keyword(line.content, options.level, vocab);
    auto coords = coordinate_tokens(convert_box(line.box, options.variant));
    kinds.insert(kinds.end(), keyword.begin(), keyword.end());
    kinds.insert(kinds.end(), coords.begin(), coords.end());
    kinds.push_back(TokenKind::eos());
  }
  return kinds;
}

}  // namespace detail

/// Token count of prompt plus lines before padding.
inline std::size_t composed_length(std::string_view prompt, const Layout& layout,
                                   const Vocabulary& vocab, const EncodeOptions& options = {}) {
  std::size_t prompt_length = 0;
  return detail::compose(prompt, layout, vocab, options, prompt_length).size();
}

/// Subword prompt, then per line: keyword tokens, coordinate tokens, eos;
/// padded to exactly `options.max_length`.
inline TokenSequence encode(std::string_view prompt, const Layout& layout, const Vocabulary& vocab,
                            const EncodeOptions& options = {}) {
  if (options.variant == ReprVariant::ltrb_angle && !vocab.angle_enabled()) {
    throw error(errc::invalid_argument, "angle representation needs a vocabulary with angle tokens");
  }
  TokenSequence seq;
  seq.max_length = options.max_length;
  seq.variant = options.variant;
  seq.level = options.level;
  seq.kinds = detail::compose(prompt, layout, vocab, options, seq.prompt_length);
  if (seq.kinds.size() > options.max_length) throw sequence_too_long(seq.kinds.size(), options.max_length);
  seq.kinds.resize(options.max_length, TokenKind::pad());
  seq.ids.reserve(seq.kinds.size());
  for (const auto& k : seq.kinds) seq.ids.push_back(vocab.id_of(k));
  return seq;
}

struct Decoded {
  std::string prompt;
  Layout layout;

  friend bool operator==(const Decoded&, const Decoded&) = default;
};

namespace detail {

inline std::vector<TokenKind::Tag> coordinate_pattern(ReprVariant variant) {
  using Tag = TokenKind::Tag;
  std::vector<Tag> tags;
  const std::size_t points = variant == ReprVariant::quad ? 4
                             : (variant == ReprVariant::center || variant == ReprVariant::top_left) ? 1
                                                                                                    : 2;
  for (std::size_t i = 0; i < points; ++i) {
    tags.push_back(Tag::coord_x);
    tags.push_back(Tag::coord_y);
  }
  if (variant == ReprVariant::ltrb_angle) tags.push_back(Tag::angle);
  return tags;
}

inline BoxRepr box_from_values(const std::vector<int>& v, ReprVariant variant) {
  switch (variant) {
    case ReprVariant::ltrb: return BoxLTRB{v[0], v[1], v[2], v[3]};
    case ReprVariant::center: return CenterPoint{{v[0], v[1]}};
    case ReprVariant::top_left: return TopLeftPoint{{v[0], v[1]}};
    case ReprVariant::ltrb_angle: return AngledBox{{v[0], v[1], v[2], v[3]}, v[4]};
    case ReprVariant::quad: {
      QuadBox q;
      for (std::size_t i = 0; i < 4; ++i) q.vertices[i] = {v[2 * i], v[2 * i + 1]};
      return q;
    }
  }
  return BoxLTRB{};
}

}  // namespace detail

/// Inverse of encode. Token kinds are recomputed from the ids; at subword
/// level the recorded prompt length separates the prompt from the first
/// keyword.
inline Decoded decode(const TokenSequence& seq, const Vocabulary& vocab, const Canvas& canvas = {}) {
  using Tag = TokenKind::Tag;
  auto fail = [](std::size_t pos, const std::string& what) -> void {
    throw error(errc::structure_error, what + " at token " + std::to_string(pos), pos);
  };
  if (seq.ids.size() != seq.max_length) {
    throw error(errc::structure_error, "sequence has " + std::to_string(seq.ids.size()) +
                                           " ids but L is " + std::to_string(seq.max_length));
  }
  std::vector<TokenKind> kinds;
  kinds.reserve(seq.ids.size());
  for (int id : seq.ids) kinds.push_back(vocab.kind_of(id));

  const bool char_level = seq.level == TokenizationLevel::char_level;
  std::size_t pos = 0;
  if (char_level) {
    while (pos < kinds.size() && kinds[pos].tag == Tag::subword) ++pos;
  } else {
    if (seq.prompt_length > kinds.size()) fail(0, "prompt length exceeds sequence");
    for (; pos < seq.prompt_length; ++pos) {
      if (kinds[pos].tag != Tag::subword) fail(pos, "non-subword token inside prompt");
    }
  }
  Decoded out;
  out.layout.canvas = canvas;
  {
    std::vector<int> prompt_ids(seq.ids.begin(), seq.ids.begin() + static_cast<std::ptrdiff_t>(pos));
    out.prompt = vocab.base().decode(prompt_ids);
  }

  const auto pattern = detail::coordinate_pattern(seq.variant);
  const Tag keyword_tag = char_level ? Tag::character : Tag::subword;
  while (pos < kinds.size() && kinds[pos].tag != Tag::pad) {
    std::string content;
    std::vector<int> subwords;
    const std::size_t line_start = pos;
    while (pos < kinds.size() && kinds[pos].tag == keyword_tag) {
      if (char_level) {
        content.push_back(static_cast<char>(kinds[pos].value));
      } else {
        subwords.push_back(kinds[pos].value);
      }
      ++pos;
    }
    if (!char_level) content = vocab.base().decode(subwords);
    if (pos == line_start) fail(pos, "expected keyword tokens");

    std::vector<int> values;
    while (pos < kinds.size() && (kinds[pos].is_coordinate() || kinds[pos].tag == Tag::angle)) {
      values.push_back(kinds[pos].value);
      ++pos;
    }
    if (values.size() != pattern.size()) {
      fail(pos, "expected " + std::to_string(pattern.size()) + " coordinate tokens, found " +
                    std::to_string(values.size()));
    }
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      if (kinds[pos - pattern.size() + i].tag != pattern[i]) fail(pos - pattern.size() + i, "coordinate kind mismatch");
    }
    if (pos >= kinds.size() || kinds[pos].tag != Tag::eos) fail(pos, "missing eos");
    ++pos;
    out.layout.lines.push_back({std::move(content), detail::box_from_values(values, seq.variant)});
  }
  for (; pos < kinds.size(); ++pos) {
    if (kinds[pos].tag != Tag::pad) fail(pos, "non-pad token after padding");
  }
  return out;
}

}  // namespace glyphplan
