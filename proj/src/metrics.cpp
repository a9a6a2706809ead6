#include "changekit/metrics.hpp"

#include "changekit/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace changekit {

namespace {

void check_corpus(std::span<const EvalPair> corpus) {
  if (corpus.empty()) throw EmptyInput("empty evaluation corpus");
  for (const auto& p : corpus) {
    if (p.hypothesis.empty()) throw EmptyHypothesis("empty hypothesis for sample " + p.sample_id);
    if (p.references.empty()) throw EmptyInput("no references for sample " + p.sample_id);
  }
}

std::map<std::string, std::size_t> unigram_counts(const TokenSequence& s) {
  std::map<std::string, std::size_t> out;
  for (const auto& t : s.tokens) ++out[t];
  return out;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> row(b.size() + 1, 0), prev(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      row[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], row[j - 1]);
    std::swap(row, prev);
  }
  return prev[b.size()];
}

// Exhaustive search for the chunk-minimal alignment among alignments that
// already maximize exact and stem matches. Maximal exact matching forces
// every occurrence of a word on the side where it is rarer to be matched
// exactly; the stem stage then pairs the leftovers of each stem class.
class MeteorSearch {
public:
  MeteorSearch(const TokenSequence& hyp, const TokenSequence& ref) : n_(hyp.size()), m_(ref.size()) {
    std::map<std::string, int> class_of;
    std::vector<std::string> hs(n_), rs(m_);
    for (std::size_t i = 0; i < n_; ++i) hs[i] = porter_stem(hyp.tokens[i]);
    for (std::size_t j = 0; j < m_; ++j) rs[j] = porter_stem(ref.tokens[j]);
    std::map<std::string, std::size_t> hw, rw;
    for (const auto& t : hyp.tokens) ++hw[t];
    for (const auto& t : ref.tokens) ++rw[t];
    auto count = [](const std::map<std::string, std::size_t>& c, const std::string& w) {
      auto it = c.find(w);
      return it == c.end() ? std::size_t{0} : it->second;
    };

    for (const auto& s : rs) class_of.emplace(s, static_cast<int>(class_of.size()));
    const std::size_t classes = class_of.size();
    std::vector<std::size_t> hcount(classes, 0), rcount(classes, 0);
    ref_class_.assign(m_, 0);
    for (std::size_t j = 0; j < m_; ++j) {
      ref_class_[j] = class_of.at(rs[j]);
      ++rcount[static_cast<std::size_t>(ref_class_[j])];
    }
    std::vector<int> hyp_class(n_, -1);
    for (std::size_t i = 0; i < n_; ++i) {
      auto it = class_of.find(hs[i]);
      if (it != class_of.end()) {
        hyp_class[i] = it->second;
        ++hcount[static_cast<std::size_t>(it->second)];
      }
    }
    target_.resize(classes);
    for (std::size_t s = 0; s < classes; ++s) {
      target_[s] = std::min(hcount[s], rcount[s]);
      matches_ += target_[s];
    }
    for (const auto& [w, c] : hw) exact_ += std::min(c, count(rw, w));

    suffix_.assign(n_ + 1, std::vector<std::size_t>(classes, 0));
    for (std::size_t i = n_; i-- > 0;) {
      suffix_[i] = suffix_[i + 1];
      if (hyp_class[i] >= 0) ++suffix_[i][static_cast<std::size_t>(hyp_class[i])];
    }

    must_use_.assign(m_, false);
    for (std::size_t j = 0; j < m_; ++j) must_use_[j] = count(hw, ref.tokens[j]) >= count(rw, ref.tokens[j]);

    options_.resize(n_);
    may_skip_.assign(n_, true);
    for (std::size_t i = 0; i < n_; ++i) {
      if (hyp_class[i] < 0) continue;
      const auto& w = hyp.tokens[i];
      const bool forced_exact = count(hw, w) <= count(rw, w);
      may_skip_[i] = !forced_exact;
      for (std::size_t j = 0; j < m_; ++j) {
        if (ref.tokens[j] == w) {
          options_[i].push_back(j);
        } else if (!forced_exact && rs[j] == hs[i] && count(hw, ref.tokens[j]) < count(rw, ref.tokens[j])) {
          options_[i].push_back(j);
        }
      }
    }
    used_.assign(m_, false);
    used_per_class_.assign(classes, 0);
  }

  MeteorAlignment run() {
    MeteorAlignment a;
    a.exact = exact_;
    a.stem = matches_ - exact_;
    if (matches_ == 0) return a;
    const int links = solve(0, -1);
    a.chunks = matches_ - static_cast<std::size_t>(std::max(links, 0));
    return a;
  }

private:
  static constexpr int kInfeasible = std::numeric_limits<int>::min() / 2;

  int solve(std::size_t i, int prev) {
    for (std::size_t s = 0; s < target_.size(); ++s)
      if (used_per_class_[s] + suffix_[i][s] < target_[s]) return kInfeasible;
    if (i == n_) {
      for (std::size_t s = 0; s < target_.size(); ++s)
        if (used_per_class_[s] != target_[s]) return kInfeasible;
      for (std::size_t j = 0; j < m_; ++j)
        if (must_use_[j] && !used_[j]) return kInfeasible;
      return 0;
    }
    std::string key;
    key.reserve(8 + m_);
    key.append(reinterpret_cast<const char*>(&i), sizeof i);
    key.append(reinterpret_cast<const char*>(&prev), sizeof prev);
    for (std::size_t j = 0; j < m_; ++j) key.push_back(used_[j] ? '1' : '0');
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    int best = kInfeasible;
    for (std::size_t j : options_[i]) {
      if (used_[j]) continue;
      const auto cls = static_cast<std::size_t>(ref_class_[j]);
      if (used_per_class_[cls] >= target_[cls]) continue;
      used_[j] = true;
      ++used_per_class_[cls];
      int v = solve(i + 1, static_cast<int>(j));
      if (v > kInfeasible) best = std::max(best, v + (prev >= 0 && static_cast<std::size_t>(prev) + 1 == j ? 1 : 0));
      --used_per_class_[cls];
      used_[j] = false;
    }
    if (may_skip_[i]) best = std::max(best, solve(i + 1, -1));
    memo_.emplace(std::move(key), best);
    return best;
  }

  std::size_t n_, m_;
  std::size_t matches_ = 0, exact_ = 0;
  std::vector<int> ref_class_;
  std::vector<std::size_t> target_;
  std::vector<std::vector<std::size_t>> suffix_;
  std::vector<bool> must_use_;
  std::vector<std::vector<std::size_t>> options_;
  std::vector<bool> may_skip_;
  std::vector<bool> used_;
  std::vector<std::size_t> used_per_class_;
  std::unordered_map<std::string, int> memo_;
};

using NgramCounts = std::map<std::vector<std::string>, double>;

std::array<NgramCounts, 4> ngram_counts(const TokenSequence& s) {
  std::array<NgramCounts, 4> out;
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t i = 0; i + n <= s.size(); ++i)
      out[n - 1][std::vector<std::string>(s.tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                          s.tokens.begin() + static_cast<std::ptrdiff_t>(i + n))] += 1.0;
  return out;
}

struct TfIdf {
  std::array<NgramCounts, 4> vec;
  std::array<double, 4> norm{};
  double length = 0;
};

TfIdf tfidf(const TokenSequence& s, const std::map<std::vector<std::string>, double>& df, double log_n) {
  TfIdf out;
  out.vec = ngram_counts(s);
  out.length = static_cast<double>(s.size());
  for (std::size_t n = 0; n < 4; ++n) {
    double sq = 0;
    for (auto& [g, tf] : out.vec[n]) {
      auto it = df.find(g);
      const double d = it == df.end() ? 0.0 : it->second;
      tf *= log_n - std::log(std::max(1.0, d));
      sq += tf * tf;
    }
    out.norm[n] = std::sqrt(sq);
  }
  return out;
}

} // namespace

EvalPair make_eval_pair(std::string sample_id, std::string_view hypothesis, std::span<const std::string> references) {
  EvalPair p;
  p.sample_id = std::move(sample_id);
  p.hypothesis = tokenize(hypothesis);
  for (const auto& r : references) p.references.push_back(tokenize(r));
  return p;
}

double bleu1(std::span<const EvalPair> corpus) {
  check_corpus(corpus);
  double clipped = 0, hyp_len = 0, ref_len = 0;
  for (const auto& p : corpus) {
    const auto hc = unigram_counts(p.hypothesis);
    std::map<std::string, std::size_t> max_ref;
    for (const auto& r : p.references)
      for (const auto& [w, c] : unigram_counts(r)) max_ref[w] = std::max(max_ref[w], c);
    for (const auto& [w, c] : hc) {
      auto it = max_ref.find(w);
      if (it != max_ref.end()) clipped += static_cast<double>(std::min(c, it->second));
    }
    const auto h = static_cast<long long>(p.hypothesis.size());
    long long closest = static_cast<long long>(p.references.front().size());
    for (const auto& r : p.references) {
      const auto len = static_cast<long long>(r.size());
      const auto d = std::llabs(len - h), bd = std::llabs(closest - h);
      if (d < bd || (d == bd && len < closest)) closest = len;
    }
    hyp_len += static_cast<double>(h);
    ref_len += static_cast<double>(closest);
  }
  if (clipped == 0) return 0.0;
  const double bp = hyp_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
  return clipped / hyp_len * bp;
}

double rouge_l_pair(const TokenSequence& hyp, const TokenSequence& ref, double beta) {
  if (hyp.empty() || ref.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(hyp.tokens, ref.tokens));
  if (lcs == 0) return 0.0;
  const double p = lcs / static_cast<double>(hyp.size());
  const double r = lcs / static_cast<double>(ref.size());
  const double b2 = beta * beta;
  return (1 + b2) * p * r / (r + b2 * p);
}

double rouge_l(std::span<const EvalPair> corpus, double beta) {
  check_corpus(corpus);
  double sum = 0;
  for (const auto& p : corpus) {
    double best = 0;
    for (const auto& r : p.references) best = std::max(best, rouge_l_pair(p.hypothesis, r, beta));
    sum += best;
  }
  return sum / static_cast<double>(corpus.size());
}

MeteorAlignment meteor_align(const TokenSequence& hyp, const TokenSequence& ref) { return MeteorSearch(hyp, ref).run(); }

double meteor_pair(const TokenSequence& hyp, const TokenSequence& ref) {
  if (hyp.empty() || ref.empty()) return 0.0;
  const auto a = meteor_align(hyp, ref);
  const auto m = static_cast<double>(a.matches());
  if (m == 0) return 0.0;
  const double p = m / static_cast<double>(hyp.size());
  const double r = m / static_cast<double>(ref.size());
  const double fmean = 10 * p * r / (r + 9 * p);
  const bool complete = a.matches() == hyp.size() && a.matches() == ref.size() && a.chunks == 1;
  const double penalty = complete ? 0.0 : 0.5 * std::pow(static_cast<double>(a.chunks) / m, 3);
  return fmean * (1 - penalty);
}

double meteor(std::span<const EvalPair> corpus) {
  check_corpus(corpus);
  double sum = 0;
  for (const auto& p : corpus) {
    double best = 0;
    for (const auto& r : p.references) best = std::max(best, meteor_pair(p.hypothesis, r));
    sum += best;
  }
  return sum / static_cast<double>(corpus.size());
}

double cider_d(std::span<const EvalPair> corpus, double sigma) {
  check_corpus(corpus);
  if (corpus.size() < 2) throw CorpusTooSmall("CIDEr-D needs at least two pairs");

  std::map<std::vector<std::string>, double> df;
  for (const auto& p : corpus) {
    std::map<std::vector<std::string>, bool> seen;
    for (const auto& r : p.references)
      for (const auto& counts : ngram_counts(r))
        for (const auto& [g, c] : counts) seen[g] = true;
    for (const auto& [g, b] : seen) df[g] += 1.0;
  }
  const double log_n = std::log(static_cast<double>(corpus.size()));

  double total = 0;
  for (const auto& p : corpus) {
    const auto h = tfidf(p.hypothesis, df, log_n);
    double score = 0;
    for (const auto& ref : p.references) {
      const auto r = tfidf(ref, df, log_n);
      const double delta = h.length - r.length;
      const double lp = std::exp(-(delta * delta) / (2 * sigma * sigma));
      for (std::size_t n = 0; n < 4; ++n) {
        double val = 0;
        for (const auto& [g, hv] : h.vec[n]) {
          auto it = r.vec[n].find(g);
          if (it != r.vec[n].end()) val += std::min(hv, it->second) * it->second;
        }
        if (h.norm[n] != 0 && r.norm[n] != 0) val /= h.norm[n] * r.norm[n];
        score += val * lp;
      }
    }
    total += score / 4.0 / static_cast<double>(p.references.size()) * 10.0;
  }
  return total / static_cast<double>(corpus.size());
}

double mae(std::span<const long long> predictions, std::span<const long long> ground_truth) {
  if (predictions.size() != ground_truth.size()) throw LengthMismatch("prediction and ground truth lengths differ");
  if (predictions.empty()) throw EmptyInput("empty MAE input");
  double sum = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    sum += static_cast<double>(std::llabs(predictions[i] - ground_truth[i]));
  return sum / static_cast<double>(predictions.size());
}

BinaryScores binary_scores(const std::vector<bool>& predictions, const std::vector<bool>& ground_truth) {
  if (predictions.size() != ground_truth.size()) throw LengthMismatch("prediction and ground truth lengths differ");
  if (predictions.empty()) throw EmptyInput("empty binary input");
  std::size_t correct = 0, positives = 0, tp = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == ground_truth[i]) ++correct;
    if (ground_truth[i]) {
      ++positives;
      if (predictions[i]) ++tp;
    }
  }
  BinaryScores out;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());
  if (positives > 0) out.recall = static_cast<double>(tp) / static_cast<double>(positives);
  return out;
}

nlohmann::ordered_json MetricsReport::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
  nlohmann::ordered_json j;
  j["task"] = task;
  j["samples"] = samples;
  j["failed"] = failed;
  j["unparseable"] = unparseable;
  j["bleu1"] = opt(bleu1);
  j["meteor"] = opt(meteor);
  j["rouge_l"] = opt(rouge_l);
  j["cider_d"] = opt(cider_d);
  j["accuracy"] = opt(accuracy);
  j["recall"] = opt(recall);
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const auto& [k, v] : mae) m[k] = v;
  j["mae"] = m;
  j["mean_iou"] = opt(mean_iou);
  return j;
}

std::string MetricsReport::to_table() const {
  std::vector<std::pair<std::string, std::string>> cols;
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v * 100.0);
    return std::string(buf);
  };
  auto raw = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  if (bleu1) cols.emplace_back("BLEU-1", pct(*bleu1));
  if (meteor) cols.emplace_back("METEOR", pct(*meteor));
  if (rouge_l) cols.emplace_back("ROUGE-L", pct(*rouge_l));
  if (cider_d) cols.emplace_back("CIDEr-D", pct(*cider_d));
  if (accuracy) cols.emplace_back("Accuracy", pct(*accuracy));
  if (recall) cols.emplace_back("Recall", pct(*recall));
  for (const auto& [k, v] : mae) cols.emplace_back("MAE(" + k + ")", raw(v));
  if (mean_iou) cols.emplace_back("mIoU", pct(*mean_iou));

  std::ostringstream head, row;
  const auto tw = std::max<std::size_t>(4, task.size());
  head << "| Task" << std::string(tw - 4, ' ') << ' ';
  row << "| " << task << std::string(tw - task.size(), ' ') << ' ';
  for (const auto& [name, value] : cols) {
    const auto w = std::max(name.size(), value.size());
    head << "| " << name << std::string(w - name.size(), ' ') << ' ';
    row << "| " << std::string(w - value.size(), ' ') << value << ' ';
  }
  head << "|";
  row << "|";
  std::ostringstream out;
  out << head.str() << '\n' << row.str() << '\n';
  out << "samples: " << samples << ", failed: " << failed << ", unparseable: " << unparseable << '\n';
  return out.str();
}

} // namespace changekit
