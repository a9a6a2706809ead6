#pragma once

// Caption metrics transcribed straight from their definitions, with no code
// shared with the library. Slow on purpose: METEOR enumerates every
// alignment.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using Sentence = std::vector<std::string>;

struct Pair {
  Sentence hyp;
  std::vector<Sentence> refs;
};

/// Hand-derived Porter stems for every word of `vocabulary()`.
const std::map<std::string, std::string>& frozen_stems();
const std::vector<std::string>& vocabulary();

/// Random corpus over `vocabulary()`; sentences of 1..max_len tokens.
std::vector<Pair> random_corpus(std::uint64_t seed, std::size_t pairs, std::size_t max_len = 7);

double bleu1(const std::vector<Pair>& corpus);
double rouge_l(const std::vector<Pair>& corpus, double beta = 1.2);
double meteor(const std::vector<Pair>& corpus);
double cider_d(const std::vector<Pair>& corpus, double sigma = 6.0);

struct Alignment {
  int exact = 0, stem = 0, chunks = 0;
};
/// Best of all one-to-one alignments by (most exact, most stem, fewest chunks).
Alignment meteor_alignment(const Sentence& hyp, const Sentence& ref);

} // namespace oracle
