#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

namespace gp = glyphplan;
using namespace testsupport;

namespace {

gp::OcrSample sale_sample() {
  gp::OcrSample s;
  s.caption = "a sale poster";
  s.ocr_lines.push_back({"SALE", {256, 128, 384, 192}});
  return s;
}

std::vector<gp::OcrSample> random_samples(Rng& rng, std::size_t n) {
  std::vector<gp::OcrSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    gp::OcrSample s;
    s.caption = random_prompt(rng, 40);
    for (int k = uniform(rng, 1, 4); k > 0; --k) s.ocr_lines.push_back({random_content(rng, 10, true), random_rect(rng, 512)});
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<gp::json> read_records(const std::filesystem::path& file) {
  std::vector<gp::json> out;
  std::istringstream in(slurp(file));
  for (std::string line; std::getline(in, line);) out.push_back(gp::json::parse(line));
  return out;
}

}  // namespace

TEST(SampleToPairs, SaleFixture) {
  const auto pairs = gp::sample_to_pairs(sale_sample());
  EXPECT_EQ(pairs[0].target, "SALE 64,32,96,48");
  EXPECT_EQ(pairs[1].target, pairs[0].target);
  EXPECT_TRUE(pairs[1].input.ends_with("Keywords: SALE"));
  EXPECT_EQ(pairs[0].input.find("Keywords:"), std::string::npos);
  EXPECT_TRUE(pairs[0].input.ends_with("Prompt: a sale poster"));
}

TEST(SampleToPairs, KeywordsKeepSourceOrder) {
  gp::OcrSample s;
  s.caption = "c";
  s.ocr_lines = {{"ZED", {0, 400, 100, 450}}, {"ALPHA", {0, 0, 100, 50}}, {"MID", {0, 200, 100, 250}}};
  EXPECT_TRUE(gp::sample_to_pairs(s)[1].input.ends_with("Keywords: ZED, ALPHA, MID"));
}

TEST(SampleToPairs, Rejections) {
  gp::OcrSample empty;
  empty.caption = "nothing";
  try {
    gp::sample_to_pairs(empty);
    FAIL();
  } catch (const gp::error& e) {
    EXPECT_EQ(e.code(), gp::errc::rejected_sample);
  }
  const auto kept = gp::sample_to_pairs(empty, {gp::Canvas{}, true});
  EXPECT_EQ(kept[0].target, "");

  auto foreign = sale_sample();
  foreign.ocr_lines[0].text = "CAF\xc3\x89";
  EXPECT_THROW(gp::sample_to_pairs(foreign), gp::error);

  auto outside = sale_sample();
  outside.ocr_lines[0].box.right = 600;
  EXPECT_THROW(gp::sample_to_pairs(outside), gp::error);

  // a trailing "1," joins the coordinate group once serialized
  auto ambiguous = sale_sample();
  ambiguous.ocr_lines[0].text = "ROOM 1,";
  EXPECT_THROW(gp::sample_to_pairs(ambiguous), gp::error);
}

TEST(SampleToPairs, NonSquareSource) {
  gp::OcrSample s;
  s.caption = "wide";
  s.image_width = 1024;
  s.image_height = 256;
  s.ocr_lines.push_back({"W", {512, 64, 1024, 128}});
  EXPECT_EQ(gp::sample_to_pairs(s)[0].target, "W 64,32,128,64");
}

TEST(SampleToPairs, TargetsReparseWithoutWarnings) {
  Rng rng(5);
  for (const auto& s : random_samples(rng, 400)) {
    gp::SamplePairs pairs;
    try {
      pairs = gp::sample_to_pairs(s);
    } catch (const gp::error&) {
      continue;
    }
    const auto parsed = gp::parse_layout(pairs[0].target, gp::ReprVariant::ltrb, gp::Canvas{}, gp::ParseMode::strict);
    EXPECT_TRUE(parsed.warnings.empty());
    EXPECT_TRUE(gp::validate_layout(parsed.layout).ok());
    ASSERT_EQ(parsed.layout.lines.size(), s.ocr_lines.size());
  }
}

TEST(Export, TenSamplesSplitFive) {
  Rng rng(6);
  TempDir dir("dataprep");
  gp::ExportOptions options;
  options.splits = {5};
  const auto m = gp::export_dataset(random_samples(rng, 10), dir.path / "out", options);
  EXPECT_EQ(m.count, 10u);
  ASSERT_EQ(m.splits.size(), 1u);
  const auto records = read_records(m.splits[0].file);
  EXPECT_EQ(records.size(), 10u);
  for (const auto& r : records) {
    EXPECT_TRUE(r.contains("input"));
    EXPECT_TRUE(r.contains("target"));
  }
  const auto manifest = gp::json::parse(slurp(dir.path / "out" / "manifest.json"));
  EXPECT_EQ(manifest["count"], 10);
  EXPECT_EQ(manifest["serializer_version"], std::string(gp::serializer_version));
}

TEST(Export, SameSeedIsByteIdentical) {
  Rng rng(7);
  const auto samples = random_samples(rng, 40);
  TempDir dir("dataprep");
  gp::ExportOptions options;
  options.splits = {10, 20};
  options.seed = 99;
  const auto a = gp::export_dataset(samples, dir.path / "a", options);
  const auto b = gp::export_dataset(samples, dir.path / "b", options);
  for (std::size_t i = 0; i < a.splits.size(); ++i) EXPECT_EQ(slurp(a.splits[i].file), slurp(b.splits[i].file));
  EXPECT_EQ(slurp(dir.path / "a" / "manifest.json"), slurp(dir.path / "b" / "manifest.json"));

  options.seed = 100;
  const auto c = gp::export_dataset(samples, dir.path / "c", options);
  EXPECT_NE(slurp(a.splits[0].file), slurp(c.splits[0].file));
}

TEST(Export, DisjointSplitsDoNotShareSamples) {
  Rng rng(8);
  const auto samples = random_samples(rng, 30);
  TempDir dir("dataprep");
  gp::ExportOptions options;
  options.splits = {10, 15};
  const auto m = gp::export_dataset(samples, dir.path, options);
  std::set<std::string> first;
  for (const auto& r : read_records(m.splits[0].file)) first.insert(r["input"].get<std::string>());
  for (const auto& r : read_records(m.splits[1].file)) EXPECT_FALSE(first.count(r["input"].get<std::string>()));
}

TEST(Export, InsufficientSamples) {
  std::vector<gp::OcrSample> pool(6000, sale_sample());
  TempDir dir("dataprep");
  gp::ExportOptions options;
  options.splits = {2500, 5000};
  try {
    gp::export_dataset(pool, dir.path, options);
    FAIL();
  } catch (const gp::error& e) {
    EXPECT_EQ(e.code(), gp::errc::insufficient_samples);
  }
  options.allow_overlap = true;
  const auto m = gp::export_dataset(pool, dir.path, options);
  EXPECT_EQ(m.count, 2 * (2500u + 5000u));
}

TEST(Export, RejectedSamplesAreCounted) {
  std::vector<gp::OcrSample> pool{sale_sample(), gp::OcrSample{"empty", {}}, sale_sample()};
  TempDir dir("dataprep");
  const auto m = gp::export_dataset(pool, dir.path);
  EXPECT_EQ(m.pool, 2u);
  EXPECT_EQ(m.rejected, 1u);
  EXPECT_EQ(m.count, 4u);
}

TEST(ReadOcrSamples, ParsesInputRecords) {
  TempDir dir("dataprep");
  const auto file = dir.path / "ocr.jsonl";
  write_file(file,
             "{\"caption\": \"a sale poster\", \"ocr\": [{\"text\": \"SALE\", \"box\": [256,128,384,192]}], \"image_side\": 512}\n"
             "\n"
             "{\"caption\": \"x\", \"ocr\": []}\n");
  const auto samples = gp::read_ocr_samples(file.string());
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(gp::sample_to_pairs(samples[0])[0].target, "SALE 64,32,96,48");

  write_file(file, "{\"caption\": 3}\n");
  EXPECT_THROW(gp::read_ocr_samples(file.string()), gp::error);
}
