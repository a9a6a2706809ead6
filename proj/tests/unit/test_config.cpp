#include "changekit/config.hpp"
#include "changekit/error.hpp"

#include <gtest/gtest.h>

using namespace changekit;

TEST(KeyValueConfig, ParsesCommentsAndWhitespace) {
  const auto cfg = KeyValueConfig::parse("# comment\n  seed = 7 \n\nname=a b\nempty =\n");
  EXPECT_EQ(cfg.get_int("seed", 0), 7);
  EXPECT_EQ(cfg.get_or("name", ""), "a b");
  ASSERT_TRUE(cfg.get("empty"));
  EXPECT_EQ(*cfg.get("empty"), "");
  EXPECT_FALSE(cfg.get("missing"));
}

TEST(KeyValueConfig, TextRoundTrip) {
  KeyValueConfig cfg;
  cfg.set("b", "2");
  cfg.set("a", "x = y");
  cfg.set("c", "");
  EXPECT_EQ(KeyValueConfig::parse(cfg.to_text()), cfg);
}

TEST(KeyValueConfig, RejectsBadLinesAndValues) {
  EXPECT_THROW(KeyValueConfig::parse("no equals sign\n"), ConfigError);
  const auto cfg = KeyValueConfig::parse("n = abc\nb = maybe\n");
  EXPECT_THROW(cfg.get_int("n", 0), ConfigError);
  EXPECT_THROW(cfg.get_bool("b", false), ConfigError);
}

TEST(KeyValueConfig, MergeOverrides) {
  auto a = KeyValueConfig::parse("x = 1\ny = 2\n");
  a.merge(KeyValueConfig::parse("y = 3\n"));
  EXPECT_EQ(a.get_int("x", 0), 1);
  EXPECT_EQ(a.get_int("y", 0), 3);
}
