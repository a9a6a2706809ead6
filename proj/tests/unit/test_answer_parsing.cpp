#include "changekit/answer_parsing.hpp"
#include "changekit/error.hpp"
#include "changekit/instructions.hpp"

#include <gtest/gtest.h>

using namespace changekit;

namespace {

const CategoryPalette kPalette = CategoryPalette::levir_mci();
const Category kRoad = kPalette.category(1);
const Category kBuilding = kPalette.category(2);

std::string english(long long n) {
  static const char* ones[] = {"zero",    "one",     "two",       "three",    "four",    "five",    "six",
                               "seven",   "eight",   "nine",      "ten",      "eleven",  "twelve",  "thirteen",
                               "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};
  static const char* tens[] = {"", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};
  if (n < 20) return ones[n];
  if (n == 100) return "one hundred";
  return std::string(tens[n / 10]) + (n % 10 ? std::string("-") + ones[n % 10] : "");
}

} // namespace

TEST(ParseYesNo, Examples) {
  EXPECT_TRUE(parse_yes_no("Yes, several buildings were built."));
  EXPECT_FALSE(parse_yes_no("no"));
  EXPECT_THROW(parse_yes_no("There might be."), Unparseable);
}

TEST(ParseYesNo, FirstStandaloneTokenWins) {
  EXPECT_FALSE(parse_yes_no("No. Yes would be wrong."));
  EXPECT_TRUE(parse_yes_no("I would say YES."));
  EXPECT_FALSE(parse_yes_no("There are no changes."));
  EXPECT_FALSE(parse_yes_no("No change has occurred"));
  EXPECT_THROW(parse_yes_no("nothing noted, eyes open"), Unparseable);
  EXPECT_THROW(parse_yes_no(""), Unparseable);
}

TEST(ParseNumberWord, Forms) {
  EXPECT_EQ(parse_number_word("three"), 3);
  EXPECT_EQ(parse_number_word("Twenty-One"), 21);
  EXPECT_EQ(parse_number_word("42"), 42);
  EXPECT_EQ(parse_number_word("zero"), 0);
  EXPECT_EQ(parse_number_word("ninety"), 90);
  EXPECT_FALSE(parse_number_word("road"));
  EXPECT_FALSE(parse_number_word(""));
}

TEST(ParseCount, SpecExamples) {
  EXPECT_EQ(parse_count("Two buildings were constructed.", kBuilding), 2);
  EXPECT_EQ(parse_count("There are no new roads.", kRoad), 0);
  EXPECT_EQ(parse_count("twenty-one houses", kBuilding), 21);
}

TEST(ParseCount, PerCategoryClauses) {
  const std::string answer = "The number of changed roads is 0, and the number of changed buildings is 3.";
  EXPECT_EQ(parse_count(answer, kRoad), 0);
  EXPECT_EQ(parse_count(answer, kBuilding), 3);
  const std::string free = "I see a new road and five houses, but no trees.";
  EXPECT_EQ(parse_count(free, kRoad), 1);
  EXPECT_EQ(parse_count(free, kBuilding), 5);
  EXPECT_EQ(parse_count("Three roads were built but none of the buildings changed.", kBuilding), 0);
}

TEST(ParseCount, WithoutCategory) {
  EXPECT_EQ(parse_count("I count 7."), 7);
  EXPECT_EQ(parse_count("None."), 0);
  EXPECT_THROW(parse_count("Hard to say."), Unparseable);
  EXPECT_THROW(parse_count("Some roads appeared.", kRoad), Unparseable);
}

TEST(ParseCount, DigitRenderingIsIdentity) {
  for (long long k = 0; k <= 100; ++k) {
    EXPECT_EQ(parse_count(std::to_string(k)), k);
    EXPECT_EQ(parse_count(std::to_string(k) + " buildings", kBuilding), k);
    EXPECT_EQ(parse_count(english(k) + " roads", kRoad), k) << english(k);
  }
}

TEST(ParseCount, GroundTruthSentencesRoundTrip) {
  for (std::size_t r = 0; r < 12; ++r) {
    for (std::size_t b = 0; b < 12; ++b) {
      const std::vector<CategoryCount> counts{{1, r}, {2, b}};
      const auto s = quantity_sentence(counts, kPalette);
      EXPECT_EQ(parse_count(s, kRoad), static_cast<long long>(r)) << s;
      EXPECT_EQ(parse_count(s, kBuilding), static_cast<long long>(b)) << s;
    }
  }
}

TEST(ParseLocalization, GroundTruthAnswers) {
  NormalizedPolygon road{{{0.1, 0.1}, {0.3, 0.1}, {0.3, 0.2}}, 1};
  NormalizedPolygon house1{{{0.5, 0.5}, {0.6, 0.5}, {0.6, 0.6}, {0.5, 0.6}}, 2};
  NormalizedPolygon house2{{{0.7, 0.7}, {0.8, 0.7}, {0.8, 0.9}}, 2};
  const std::vector<NormalizedPolygon> all{road, house1, house2};
  const auto parsed = parse_localization(localization_answer(all, kPalette, 2), kPalette);
  ASSERT_EQ(parsed.size(), 3u);
  EXPECT_EQ(parsed[0], road);
  EXPECT_EQ(parsed[1], house1);
  EXPECT_EQ(parsed[2], house2);
  EXPECT_TRUE(parse_localization(kNoChangeLocalization, kPalette).empty());
}

TEST(ParseLocalization, FreeFormAndFailures) {
  const auto p = parse_localization(
      "A house appears at [(0.1, 0.1), (0.2, 0.1), (0.2, 0.2)], and a street at ((0.5,0.5),(0.6,0.5),(0.6,0.6)).",
      kPalette);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].category, 2);
  EXPECT_EQ(p[1].category, 1);
  // A polygon before any category word is unusable.
  EXPECT_THROW(parse_localization("[(0.1, 0.1), (0.2, 0.1), (0.2, 0.2)] is a road", kPalette), Unparseable);
  EXPECT_THROW(parse_localization("Somewhere in the middle.", kPalette), Unparseable);
  EXPECT_TRUE(parse_localization("There are none.", kPalette).empty());
}

TEST(CategoryKeywords, IncludeSynonyms) {
  const auto b = category_keywords(kBuilding);
  EXPECT_NE(std::find(b.begin(), b.end(), "houses"), b.end());
  EXPECT_NE(std::find(b.begin(), b.end(), "building"), b.end());
  const auto r = category_keywords(kRoad);
  EXPECT_NE(std::find(r.begin(), r.end(), "street"), r.end());
}
