// Plans a layout for a prompt, prints its language-format text, then encodes
// prompt + layout into the hybrid token sequence and decodes it back.

#include <iostream>

#include "glyphplan/grammar.hpp"
#include "glyphplan/planner.hpp"
#include "glyphplan/tokenizer.hpp"

int main(int argc, char** argv) {
  namespace gp = glyphplan;
  const std::string prompt = argc > 1 ? argv[1] : "a vintage poster that says \"WILD LIFE\" and \"SAVE THEM\"";

  const auto layout = gp::plan_layout({prompt, std::nullopt, 7});
  std::cout << gp::serialize_layout(layout, gp::ReprVariant::ltrb) << "\n\n";

  const gp::Vocabulary vocab(gp::BpeModel::byte_level(), false);
  const auto seq = gp::encode(prompt, layout, vocab);
  std::size_t used = 0;
  for (std::size_t i = 0; i < seq.ids.size(); ++i) {
    if (seq.kinds[i].tag == gp::TokenKind::Tag::pad) break;
    if (i >= seq.prompt_length) std::cout << vocab.surface(seq.ids[i]) << ' ';
    ++used;
  }
  std::cout << "\n\n" << used << " of " << seq.max_length << " tokens used\n";

  const auto back = gp::decode(seq, vocab);
  std::cout << (back.layout == layout && back.prompt == prompt ? "roundtrip ok" : "roundtrip MISMATCH") << '\n';
  return 0;
}
