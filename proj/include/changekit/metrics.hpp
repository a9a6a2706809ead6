#pragma once

// Caption metrics (BLEU-1, METEOR without synonyms, ROUGE-L, CIDEr-D) and the
// task metrics for counting (MAE) and change classification (accuracy,
// recall). All caption metrics consume the canonical tokenizer output.

#include "changekit/text.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace changekit {

struct EvalPair {
  std::string sample_id;
  TokenSequence hypothesis;
  std::vector<TokenSequence> references; // 1-5

  bool operator==(const EvalPair&) const = default;
};

EvalPair make_eval_pair(std::string sample_id, std::string_view hypothesis, std::span<const std::string> references);

/// Corpus BLEU-1: clipped unigram precision times the brevity penalty, with
/// the per-pair closest reference length (shorter wins ties).
double bleu1(std::span<const EvalPair> corpus);

/// LCS F-measure, (1 + b^2) P R / (R + b^2 P), best reference per pair,
/// averaged over pairs.
double rouge_l_pair(const TokenSequence& hyp, const TokenSequence& ref, double beta = 1.2);
double rouge_l(std::span<const EvalPair> corpus, double beta = 1.2);

struct MeteorAlignment {
  std::size_t exact = 0;
  std::size_t stem = 0;
  std::size_t chunks = 0;
  std::size_t matches() const { return exact + stem; }
};

/// One-to-one unigram alignment maximizing exact matches, then Porter-stem
/// matches, then minimizing the number of chunks (runs contiguous in both
/// sentences).
MeteorAlignment meteor_align(const TokenSequence& hyp, const TokenSequence& ref);

/// F_mean = 10PR / (R + 9P); penalty = 0.5 (chunks / matches)^3, except a
/// complete single-chunk alignment of equal-length sentences has no penalty.
double meteor_pair(const TokenSequence& hyp, const TokenSequence& ref);
double meteor(std::span<const EvalPair> corpus);

/// CIDEr-D with n = 1..4, document frequencies over the corpus references,
/// hypothesis tf-idf clipped to the reference, Gaussian length penalty
/// (sigma in tokens), mean over n and references, times 10, averaged over
/// pairs. Throws CorpusTooSmall for fewer than two pairs.
double cider_d(std::span<const EvalPair> corpus, double sigma = 6.0);

/// Mean |p - g|. Throws LengthMismatch / EmptyInput.
double mae(std::span<const long long> predictions, std::span<const long long> ground_truth);

struct BinaryScores {
  double accuracy = 0.0;
  std::optional<double> recall; // absent without positive ground truth
};

/// Positive means "changed". Throws LengthMismatch / EmptyInput.
BinaryScores binary_scores(const std::vector<bool>& predictions, const std::vector<bool>& ground_truth);

struct MetricsReport {
  std::string task;
  std::size_t samples = 0;      // samples attempted
  std::size_t failed = 0;       // sessions that did not complete
  std::size_t unparseable = 0;  // completed but unparseable answers
  std::optional<double> bleu1, meteor, rouge_l, cider_d;
  std::optional<double> accuracy, recall;
  std::map<std::string, double> mae; // per category (plural name)
  std::optional<double> mean_iou;

  nlohmann::ordered_json to_json() const;
  /// Scores as percentages (x100, 2 dp) in the layout of a results table.
  std::string to_table() const;

  bool operator==(const MetricsReport&) const = default;
};

} // namespace changekit
