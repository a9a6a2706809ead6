#include "changekit/text.hpp"

#include "oracles/metric_oracles.hpp"

#include <gtest/gtest.h>

using namespace changekit;

namespace {

std::vector<std::string> toks(std::string_view s) { return tokenize(s).tokens; }
using V = std::vector<std::string>;

} // namespace

TEST(Tokenize, SimpleSentence) { EXPECT_EQ(toks("A road is built."), (V{"a", "road", "is", "built", "."})); }

TEST(Tokenize, Empty) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("  \t\n ").empty());
}

TEST(Tokenize, Clitics) {
  EXPECT_EQ(toks("don't"), (V{"do", "n't"}));
  EXPECT_EQ(toks("It's there, isn't it?"), (V{"it", "'s", "there", ",", "is", "n't", "it", "?"}));
  EXPECT_EQ(toks("they're we've I'll you'd I'm"), (V{"they", "'re", "we", "'ve", "i", "'ll", "you", "'d", "i", "'m"}));
}

TEST(Tokenize, HyphensAndNumbers) {
  EXPECT_EQ(toks("twenty-one houses"), (V{"twenty-one", "houses"}));
  EXPECT_EQ(toks("1.5 km, 1,000 m."), (V{"1.5", "km", ",", "1,000", "m", "."}));
  EXPECT_EQ(toks("-a- b"), (V{"-", "a", "-", "b"}));
}

TEST(Tokenize, PunctuationAndQuotes) {
  EXPECT_EQ(toks("Roads (two) appear!"), (V{"roads", "(", "two", ")", "appear", "!"}));
  EXPECT_EQ(toks("\"new\" road"), (V{"``", "new", "''", "road"}));
}

TEST(Tokenize, NoEmptyTokensAndLowercase) {
  for (const char* s : {"A  B", "X.Y", "  ..  ", "'quoted'", "Mixed CASE words"}) {
    for (const auto& t : toks(s)) {
      EXPECT_FALSE(t.empty());
      for (char c : t) EXPECT_FALSE(c >= 'A' && c <= 'Z');
    }
  }
}

TEST(PorterStem, FrozenVocabulary) {
  for (const auto& [word, stem] : oracle::frozen_stems()) EXPECT_EQ(porter_stem(word), stem) << word;
}

TEST(PorterStem, ClassicExamples) {
  const std::vector<std::pair<const char*, const char*>> cases{
      {"caresses", "caress"},   {"ponies", "poni"},       {"ties", "ti"},           {"caress", "caress"},
      {"cats", "cat"},          {"feed", "feed"},         {"agreed", "agre"},       {"plastered", "plaster"},
      {"motoring", "motor"},    {"sing", "sing"},         {"conflated", "conflat"}, {"troubled", "troubl"},
      {"sized", "size"},        {"hopping", "hop"},       {"tanned", "tan"},        {"falling", "fall"},
      {"hissing", "hiss"},      {"fizzed", "fizz"},       {"failing", "fail"},      {"filing", "file"},
      {"happy", "happi"},       {"sky", "sky"},           {"relational", "relat"},  {"conditional", "condit"},
      {"rational", "ration"},   {"valenci", "valenc"},    {"digitizer", "digit"},   {"conformabli", "conform"},
      {"radicalli", "radic"},   {"differentli", "differ"}, {"vileli", "vile"},      {"analogousli", "analog"},
      {"vietnamization", "vietnam"}, {"predication", "predic"}, {"operator", "oper"}, {"feudalism", "feudal"},
      {"decisiveness", "decis"}, {"hopefulness", "hope"}, {"callousness", "callous"}, {"formaliti", "formal"},
      {"sensitiviti", "sensit"}, {"sensibiliti", "sensibl"}, {"triplicate", "triplic"}, {"formative", "form"},
      {"formalize", "formal"},  {"electriciti", "electr"}, {"electrical", "electr"}, {"hopeful", "hope"},
      {"goodness", "good"},     {"revival", "reviv"},     {"allowance", "allow"},   {"inference", "infer"},
      {"airliner", "airlin"},   {"gyroscopic", "gyroscop"}, {"adjustable", "adjust"}, {"defensible", "defens"},
      {"irritant", "irrit"},    {"replacement", "replac"}, {"adjustment", "adjust"}, {"dependent", "depend"},
      {"adoption", "adopt"},    {"homologou", "homolog"}, {"communism", "commun"},  {"activate", "activ"},
      {"angulariti", "angular"}, {"homologous", "homolog"}, {"effective", "effect"}, {"bowdlerize", "bowdler"},
      {"probate", "probat"},    {"rate", "rate"},         {"cease", "ceas"},        {"controll", "control"},
      {"roll", "roll"},         {"generalizations", "gener"}, {"oscillators", "oscil"}};
  for (const auto& [w, s] : cases) EXPECT_EQ(porter_stem(w), s) << w;
}

TEST(PorterStem, ShortWordsUnchanged) {
  EXPECT_EQ(porter_stem("is"), "is");
  EXPECT_EQ(porter_stem("a"), "a");
  EXPECT_EQ(porter_stem(""), "");
}
