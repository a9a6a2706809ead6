#include "changekit/dataset_io.hpp"
#include "changekit/error.hpp"

#include "oracles/fixture.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace changekit;
namespace fs = std::filesystem;

namespace {

ConversationRecord sample_record(std::string id, std::string answer) {
  ConversationRecord r;
  r.record_id = std::move(id);
  r.sample_id = "train_000001";
  r.kind = RecordKind::caption;
  r.image_a = "A/train_000001.png";
  r.image_b = "B/train_000001.png";
  r.turns = {{Speaker::human, with_image_placeholders("What has changed?")}, {Speaker::assistant, std::move(answer)}};
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

} // namespace

TEST(ScanCorpus, EmptyDirectoryYieldsNoSamples) {
  fixture::TempDir dir;
  const auto m = scan_corpus(dir.path(), CorpusConfig{});
  EXPECT_TRUE(m.samples.empty());
}

TEST(ScanCorpus, MissingRootIsIoFailure) {
  EXPECT_THROW(scan_corpus("/nonexistent/changekit/root", CorpusConfig{}), IoFailure);
}

TEST(ScanCorpus, ReturnsSamplesSortedById) {
  fixture::TempDir dir;
  auto samples = fixture::make_samples(3, 1);
  std::reverse(samples.begin(), samples.end());
  const auto cfg = fixture::write_corpus(dir.path(), samples);
  const auto m = scan_corpus(dir.path(), cfg);
  ASSERT_EQ(m.samples.size(), 3u);
  EXPECT_EQ(m.samples[0].sample_id, "train_000000");
  EXPECT_EQ(m.samples[1].sample_id, "train_000001");
  EXPECT_EQ(m.samples[2].sample_id, "train_000002");
  for (const auto& s : m.samples) {
    EXPECT_TRUE(fs::exists(s.image_a));
    EXPECT_TRUE(fs::exists(s.image_b));
    EXPECT_TRUE(fs::exists(s.change_map));
    EXPECT_EQ(s.split, Split::train);
  }
}

TEST(ScanCorpus, WrongCaptionCountNamesTheSample) {
  fixture::TempDir dir;
  const auto samples = fixture::make_samples(3, 2);
  const auto cfg = fixture::write_corpus(dir.path(), samples);
  nlohmann::json index;
  std::ifstream(dir.path() / cfg.caption_index) >> index;
  index["images"][1]["sentences"].erase(0);
  std::ofstream(dir.path() / cfg.caption_index) << index.dump();
  try {
    scan_corpus(dir.path(), cfg);
    FAIL() << "expected CorpusError";
  } catch (const CorpusError& e) {
    ASSERT_EQ(e.issues().size(), 1u);
    EXPECT_EQ(e.issues()[0].kind, CorpusIssueKind::CaptionCountMismatch);
    EXPECT_EQ(e.issues()[0].sample_id, samples[1].id);
  }
}

TEST(ScanCorpus, CollectsEveryIssue) {
  fixture::TempDir dir;
  const auto samples = fixture::make_samples(3, 3);
  const auto cfg = fixture::write_corpus(dir.path(), samples);
  fs::remove(dir.path() / "images" / "train" / "B" / (samples[0].id + ".png"));
  fs::remove(dir.path() / "images" / "train" / "label" / (samples[2].id + ".png"));
  try {
    scan_corpus(dir.path(), cfg);
    FAIL() << "expected CorpusError";
  } catch (const CorpusError& e) {
    ASSERT_EQ(e.issues().size(), 2u);
    EXPECT_EQ(e.issues()[0].kind, CorpusIssueKind::MissingFile);
    EXPECT_EQ(e.issues()[1].sample_id, samples[2].id);
  }
}

TEST(ScanCorpus, DimensionMismatchIsReported) {
  fixture::TempDir dir;
  auto cfg = fixture::write_corpus(dir.path(), fixture::make_samples(1, 4));
  cfg.image_size = {256, 256};
  try {
    scan_corpus(dir.path(), cfg);
    FAIL() << "expected CorpusError";
  } catch (const CorpusError& e) {
    ASSERT_EQ(e.issues().size(), 1u);
    EXPECT_EQ(e.issues()[0].kind, CorpusIssueKind::DimensionMismatch);
  }
}

TEST(CorpusConfig, RoundTripsThroughKeyValueText) {
  CorpusConfig c;
  c.image_size = {64, 32};
  c.palette = CategoryPalette{};
  c.palette.add({0, "background", "background", 0});
  c.palette.add({1, "tree", "trees", 0x00FF00});
  const auto back = CorpusConfig::from_config(KeyValueConfig::parse(c.to_config().to_text()));
  EXPECT_EQ(back, c);
}

TEST(CorpusConfig, LoadsChangeMapThroughPalette) {
  fixture::TempDir dir;
  const auto samples = fixture::make_samples(4, 5);
  const auto cfg = fixture::write_corpus(dir.path(), samples);
  const auto m = scan_corpus(dir.path(), cfg);
  for (std::size_t i = 0; i < samples.size(); ++i)
    EXPECT_EQ(load_change_map(m.samples[i], m), fixture::grid_of(samples[i]));
}

TEST(Records, WritingNoRecordsCreatesEmptyFile) {
  fixture::TempDir dir;
  const auto path = dir.path() / "out.jsonl";
  EXPECT_EQ(write_records({}, path), 0u);
  ASSERT_TRUE(fs::exists(path));
  EXPECT_EQ(fs::file_size(path), 0u);
  EXPECT_TRUE(read_records(path).empty());
}

TEST(Records, NewlinesInTextAreEscaped) {
  fixture::TempDir dir;
  const auto path = dir.path() / "out.jsonl";
  const std::vector<ConversationRecord> recs{sample_record("r0", "line one\nline two")};
  write_records(recs, path);
  const auto text = slurp(path);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_NE(text.find("line one\\nline two"), std::string::npos);
  EXPECT_EQ(read_records(path), recs);
}

TEST(Records, RoundTripPreservesOrder) {
  fixture::TempDir dir;
  const auto path = dir.path() / "out.jsonl";
  std::vector<ConversationRecord> recs;
  for (int i = 0; i < 5; ++i) recs.push_back(sample_record("r" + std::to_string(4 - i), "ans \"" + std::to_string(i) + "\""));
  EXPECT_EQ(write_records(recs, path), 5u);
  EXPECT_EQ(read_records(path), recs);
}

TEST(Records, TruncatedLineIsMalformed) {
  fixture::TempDir dir;
  const auto path = dir.path() / "out.jsonl";
  const std::vector<ConversationRecord> recs{sample_record("r0", "a"), sample_record("r1", "b")};
  write_records(recs, path);
  auto text = slurp(path);
  text.resize(text.size() - 10);
  std::ofstream(path, std::ios::binary) << text;
  try {
    read_records(path);
    FAIL() << "expected MalformedLine";
  } catch (const MalformedLine& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Records, MissingKindIsSchemaViolation) {
  fixture::TempDir dir;
  const auto path = dir.path() / "out.jsonl";
  auto j = record_to_json(sample_record("r0", "a"));
  j.erase("kind");
  std::ofstream(path) << j.dump() << "\n";
  try {
    read_records(path);
    FAIL() << "expected SchemaViolation";
  } catch (const SchemaViolation& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(Records, UnwritablePathIsIoFailure) {
  EXPECT_THROW(write_records({}, "/nonexistent/dir/out.jsonl"), IoFailure);
  EXPECT_THROW(read_records("/nonexistent/dir/out.jsonl"), IoFailure);
}
