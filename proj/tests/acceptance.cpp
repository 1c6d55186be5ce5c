// Acceptance gate: one test per primary criterion, each reported as a single
// PASS/FAIL line. Exits nonzero when any criterion fails.

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "service_suite.hpp"
#include "support.hpp"

namespace gp = glyphplan;
using namespace testsupport;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class CriterionPrinter : public ::testing::EmptyTestEventListener {
  void OnTestEnd(const ::testing::TestInfo& info) override {
    const auto* r = info.result();
    std::cout << "[acceptance] " << (r->Passed() ? "PASS" : "FAIL") << "  " << info.name() << "  ("
              << r->elapsed_time() << " ms)" << std::endl;
  }
};

}  // namespace

TEST(Acceptance, VocabularyCounts) {
  const auto start = Clock::now();
  for (bool angle : {false, true}) {
    const gp::Vocabulary v(gp::BpeModel::byte_level(), angle);
    std::size_t x = 0, y = 0, chars = 0, eos = 0, pad = 0, angles = 0;
    for (std::size_t id = v.base().size(); id < v.size(); ++id) {
      switch (v.kind_of(static_cast<int>(id)).tag) {
        case gp::TokenKind::Tag::coord_x: ++x; break;
        case gp::TokenKind::Tag::coord_y: ++y; break;
        case gp::TokenKind::Tag::character: ++chars; break;
        case gp::TokenKind::Tag::eos: ++eos; break;
        case gp::TokenKind::Tag::pad: ++pad; break;
        case gp::TokenKind::Tag::angle: ++angles; break;
        default: break;
      }
    }
    EXPECT_EQ(x + y, 256u);
    EXPECT_EQ(chars, 95u);
    EXPECT_EQ(eos, 1u);
    EXPECT_EQ(pad, 1u);
    EXPECT_EQ(angles, angle ? 181u : 0u);
    EXPECT_EQ(v.size(), 256u + 256u + 95u + 2u + (angle ? 181u : 0u));
  }
  EXPECT_LT(seconds_since(start), 1.0);
}

TEST(Acceptance, TokenizerRoundtrip) {
  const auto start = Clock::now();
  const gp::Vocabulary v(gp::BpeModel::byte_level(), true);
  Rng rng(1001);
  std::size_t checked = 0;
  for (auto variant : gp::all_repr_variants) {
    const gp::EncodeOptions o{gp::TokenizationLevel::char_level, variant, gp::default_length_for(variant)};
    for (int i = 0; i < 200;) {
      const auto prompt = random_prompt(rng, 20);
      const auto layout = random_layout(rng, variant, 4, 127, true, 8);
      if (gp::composed_length(prompt, layout, v, o) > o.max_length) continue;
      const auto back = gp::decode(gp::encode(prompt, layout, v, o), v);
      ASSERT_EQ(back.prompt, prompt);
      ASSERT_EQ(back.layout, layout);
      ++i;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 1000u);
  EXPECT_LT(seconds_since(start), 10.0);
}

TEST(Acceptance, WildDecomposition) {
  const gp::Vocabulary v(gp::BpeModel::byte_level(), false);
  const auto kinds = gp::tokenize_keyword("WILD", gp::TokenizationLevel::char_level, v);
  ASSERT_EQ(kinds.size(), 4u);
  std::string surfaces;
  for (const auto& k : kinds) {
    EXPECT_EQ(k.tag, gp::TokenKind::Tag::character);
    surfaces += v.surface(v.id_of(k));
  }
  EXPECT_EQ(surfaces, "[W][I][L][D]");
}

TEST(Acceptance, GrammarRoundtripAndFuzz) {
  Rng rng(2002);
  for (auto v : gp::all_repr_variants) {
    for (int i = 0; i < 1000; ++i) {
      const auto layout = random_layout(rng, v, 6);
      const auto text = gp::serialize_layout(layout, v);
      const auto back = gp::parse_layout(text, v, gp::Canvas{}, gp::ParseMode::strict);
      ASSERT_EQ(back.layout, layout) << text;
      ASSERT_TRUE(back.warnings.empty()) << text;
    }
  }

  double budget = 60.0;
  if (const char* env = std::getenv("GLYPHPLAN_FUZZ_SECONDS")) budget = std::atof(env);
  const auto start = Clock::now();
  std::size_t inputs = 0, structured = 0;
  while (seconds_since(start) < budget) {
    for (int k = 0; k < 256; ++k, ++inputs) {
      std::string s(static_cast<std::size_t>(uniform(rng, 0, 80)), '\0');
      for (auto& c : s) c = coin(rng, 0.5) ? "0123456789,- \n"[uniform(rng, 0, 13)] : static_cast<char>(uniform(rng, 0, 255));
      const auto v = gp::all_repr_variants[static_cast<std::size_t>(uniform(rng, 0, 4))];
      for (auto mode : {gp::ParseMode::strict, gp::ParseMode::lenient}) {
        try {
          const auto r = gp::parse_layout(s, v, gp::Canvas{}, mode);
          ASSERT_TRUE(gp::validate_layout(r.layout).ok());
        } catch (const gp::error&) {
          ++structured;
        } catch (const std::exception& e) {
          FAIL() << "unstructured exception: " << e.what();
        }
      }
    }
  }
  std::cout << "  fuzzed " << inputs << " inputs, " << structured << " structured errors" << std::endl;
}

TEST(Acceptance, IouOracle) {
  const auto start = Clock::now();
  EXPECT_EQ(gp::box_iou({0, 0, 10, 10}, {5, 5, 15, 15}), 25.0 / 175.0);
  Rng rng(3003);
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_rect(rng, 64);
    const auto b = random_rect(rng, 64);
    ASSERT_NEAR(gp::box_iou(a, b), cell_count_iou(a, b), 1e-9);
  }
  EXPECT_LT(seconds_since(start), 10.0);
}

TEST(Acceptance, MetricOracles) {
  Rng rng(4004);
  const std::vector<std::string> pool{"a", "A", "b", "SALE", "sale", "Open", "OPEN", "x"};
  for (int i = 0; i < 500; ++i) {
    std::vector<std::string> gt, pred;
    for (int k = uniform(rng, 0, 6); k > 0; --k) gt.push_back(pool[static_cast<std::size_t>(uniform(rng, 0, 7))]);
    for (int k = uniform(rng, 0, 6); k > 0; --k) pred.push_back(pool[static_cast<std::size_t>(uniform(rng, 0, 7))]);
    const auto counts = gp::match_keywords(pred, gt, false);
    ASSERT_EQ(counts.matched, brute_force_keyword_matches(pred, gt, false));
    ASSERT_EQ(counts.exact, same_multiset(pred, gt, false));

    std::vector<gp::BoxLTRB> pb, gb;
    for (int k = uniform(rng, 0, 6); k > 0; --k) gb.push_back(random_rect(rng, 10, false));
    for (int k = uniform(rng, 0, 6); k > 0; --k) {
      pb.push_back(!gb.empty() && coin(rng) ? gb[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(gb.size()) - 1))]
                                            : random_rect(rng, 10, false));
    }
    const int pct = uniform(rng, 1, 10) * 10;
    ASSERT_EQ(gp::detection_match_metrics(pb, gb, pct / 100.0).matched, brute_force_detection(pb, gb, {pct, 100}));
  }
}

TEST(Acceptance, PlannerValidity) {
  Rng rng(5005);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> kw;
    for (int k = uniform(rng, 0, 21); k > 0; --k) kw.push_back(random_content(rng, 30, false));
    const gp::PlanRequest req{random_request_prompt(rng), kw, rng()};
    const auto a = gp::plan_layout(req);
    ASSERT_TRUE(gp::validate_layout(a).ok());
    if (a.lines.size() >= 2) ASSERT_EQ(gp::max_pairwise_iou(a), 0.0);
    ASSERT_EQ(gp::serialize_layout(a, gp::ReprVariant::ltrb), gp::serialize_layout(gp::plan_layout(req), gp::ReprVariant::ltrb));
  }
}

TEST(Acceptance, EditSessionLaws) {
  Rng rng(6006);
  for (int round = 0; round < 200; ++round) {
    std::vector<std::string> kw;
    for (int i = uniform(rng, 0, 4); i > 0; --i) kw.push_back(random_content(rng, 8, false));
    auto s = gp::create_session({"prompt", kw, rng()});
    for (int step = 0; step < 20; ++step) {
      const auto n = s.current().lines.size();
      const auto before = s.current();
      const std::size_t idx = n ? static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(n) - 1)) : 0;
      gp::EditCommand cmd;
      switch (uniform(rng, 0, 5)) {
        case 0: cmd = gp::Regenerate{rng() % 1000}; break;
        case 1: cmd = gp::AddText{random_content(rng, 8, false), std::nullopt}; break;
        case 2: cmd = gp::RemoveText{idx}; break;
        case 3: cmd = gp::MoveBox{idx, uniform(rng, -150, 150), uniform(rng, -150, 150)}; break;
        case 4: cmd = gp::ResizeBox{idx, random_rect(rng, 128)}; break;
        default: cmd = gp::SetText{idx, random_content(rng, 8, false)}; break;
      }
      try {
        auto next = gp::apply_edit(s, cmd);
        ASSERT_EQ(gp::undo(next).current(), before);
        s = std::move(next);
      } catch (const gp::error&) {
        ASSERT_EQ(s.current(), before);
      }
      ASSERT_TRUE(gp::validate_layout(s.current()).ok());
    }
  }
}

TEST(Acceptance, DataprepFidelity) {
  gp::OcrSample sale;
  sale.caption = "a sale poster";
  sale.ocr_lines.push_back({"SALE", {256, 128, 384, 192}});
  EXPECT_EQ(gp::normalize_box({256, 128, 384, 192}, 512, gp::Canvas{}), (gp::BoxLTRB{64, 32, 96, 48}));
  EXPECT_EQ(gp::sample_to_pairs(sale)[0].target, "SALE 64,32,96,48");

  Rng rng(7007);
  std::vector<gp::OcrSample> samples{sale};
  for (int i = 0; i < 500; ++i) {
    gp::OcrSample s;
    s.caption = random_prompt(rng, 30);
    for (int k = uniform(rng, 1, 4); k > 0; --k) s.ocr_lines.push_back({random_content(rng, 10, true), random_rect(rng, 512)});
    samples.push_back(std::move(s));
  }
  TempDir dir("acceptance");
  const auto manifest = gp::export_dataset(samples, dir.path);
  ASSERT_GT(manifest.count, 0u);
  std::istringstream in(slurp(manifest.splits.at(0).file));
  std::size_t records = 0;
  for (std::string line; std::getline(in, line); ++records) {
    const auto target = gp::json::parse(line)["target"].get<std::string>();
    const auto parsed = gp::parse_layout(target, gp::ReprVariant::ltrb, gp::Canvas{}, gp::ParseMode::lenient);
    ASSERT_TRUE(parsed.warnings.empty()) << target;
    ASSERT_EQ(gp::serialize_layout(parsed.layout, gp::ReprVariant::ltrb), target);
  }
  EXPECT_EQ(records, manifest.count);
}

TEST(Acceptance, LengthCdf) {
  const gp::Vocabulary v(gp::BpeModel::byte_level(), false);
  Rng rng(8008);
  std::vector<gp::CorpusEntry> corpus;
  for (int i = 0; i < 10000; ++i) {
    corpus.push_back({random_prompt(rng, 80), random_layout(rng, gp::ReprVariant::ltrb, 5, 128, true, 12)});
  }
  const std::vector<std::size_t> limits{32, 64, 96, 128, 192, 256, 512};
  const auto start = Clock::now();
  const auto rows = gp::length_coverage(corpus, v, {}, limits);
  const double elapsed = seconds_since(start);

  std::vector<std::size_t> lengths;
  for (const auto& e : corpus) lengths.push_back(gp::composed_length(e.prompt, e.layout, v));
  ASSERT_EQ(rows.size(), limits.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto direct = static_cast<std::size_t>(
        std::count_if(lengths.begin(), lengths.end(), [&](std::size_t n) { return n <= limits[i]; }));
    EXPECT_EQ(rows[i].covered, direct);
    EXPECT_EQ(rows[i].fraction, double(direct) / double(lengths.size()));
    if (i) EXPECT_GE(rows[i].fraction, rows[i - 1].fraction);
  }
  EXPECT_LT(elapsed, 5.0);
}

TEST(Acceptance, ServiceContract) {
  gp::Service service{gp::ServiceConfig{}};
  for (const auto& o : run_service_suite(service)) EXPECT_EQ(o.failure, "") << o.name;
  for (const auto& o : run_backend_cases()) EXPECT_EQ(o.failure, "") << o.name;
}

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(new CriterionPrinter);
  return RUN_ALL_TESTS();
}
