#pragma once

// Rule-based instruction generation: captioning, binary change
// classification, per-category quantification, localization and the
// easy-to-hard multi-turn conversation.

#include "changekit/dataset_io.hpp"
#include "changekit/geometry.hpp"
#include "changekit/records.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace changekit {

inline constexpr std::string_view kCaptionQuestion = "Please briefly describe the changes in these two images.";
inline constexpr std::string_view kYesNoConstraint = "Please answer yes or no.";
inline constexpr std::string_view kNoChangeLocalization = "There are no changed objects in these two images.";
inline constexpr std::uint64_t kDefaultSeed = 20240917;

/// Binary questions; every entry ends with kYesNoConstraint.
extern const std::array<std::string_view, 10> kBinaryQuestions;
/// `{categories}` expands to e.g. "roads and buildings".
extern const std::array<std::string_view, 10> kQuantifyQuestions;
extern const std::array<std::string_view, 10> kLocalizeQuestions;
/// Second round of the multi-turn conversation.
inline constexpr std::string_view kObjectQuestion =
    "What has changed between the two images? How many {categories} have changed?";

struct GenerationConfig {
  std::uint64_t seed = kDefaultSeed;
  Connectivity connectivity = Connectivity::eight;
  std::optional<double> epsilon; // pixels; unset = 2% of the larger image side
  int precision = kDefaultPrecision;
  std::size_t min_area = 0;
  bool skip_unchanged = false; // no quantify/localize/multi_turn for no-change samples
  std::size_t jobs = 1;

  double epsilon_for(ImageSize size) const { return epsilon.value_or(default_epsilon(size.width, size.height)); }
};

/// Deterministic index in [0, n) from (seed, salt, sample_id) via FNV-1a.
std::size_t stable_choice(std::uint64_t seed, std::string_view salt, std::string_view sample_id, std::size_t n);

/// "roads and buildings", "roads, buildings and trees", ...
std::string category_phrase(const CategoryPalette& palette);
std::string expand_categories(std::string_view templ, const CategoryPalette& palette);

struct CategoryCount {
  CategoryId category = 0;
  std::size_t count = 0;
  bool operator==(const CategoryCount&) const = default;
};

/// Everything the generators need to know about one change map.
struct SampleAnalysis {
  bool changed = false;                     // any non-background pixel
  std::vector<CategoryCount> counts;        // per change category, palette order
  std::vector<NormalizedPolygon> polygons;  // grouped by category, component order
};

SampleAnalysis analyze_change_map(const LabelGrid& grid, const CategoryPalette& palette,
                                  const GenerationConfig& config);

/// "The number of changed roads is 0, and the number of changed buildings is 3."
std::string quantity_sentence(std::span<const CategoryCount> counts, const CategoryPalette& palette);

/// Per-category polygon listing, or kNoChangeLocalization when empty.
std::string localization_answer(std::span<const NormalizedPolygon> polygons, const CategoryPalette& palette,
                                int precision);

std::array<ConversationRecord, 5> gen_caption_records(const SampleBundle& sample);

ConversationRecord gen_binary_record(const SampleBundle& sample, const LabelGrid& grid,
                                     const GenerationConfig& config = {});

ConversationRecord gen_quantify_record(const SampleBundle& sample, const LabelGrid& grid,
                                       const CategoryPalette& palette, const GenerationConfig& config = {});

ConversationRecord gen_localize_record(const SampleBundle& sample, std::span<const NormalizedPolygon> polygons,
                                       const CategoryPalette& palette, const GenerationConfig& config = {});

/// binary -> objects and counts -> caption, each round answered from the
/// change map; the caption is picked by a sample-seeded choice.
ConversationRecord gen_multiturn_record(const SampleBundle& sample, const LabelGrid& grid,
                                        const CategoryPalette& palette, const GenerationConfig& config = {});

/// Per-kind tallies in a fixed kind order.
struct CountReport {
  std::map<RecordKind, std::size_t> per_kind;
  std::size_t rule_based = 0;
  std::size_t gpt_assisted = 0;
  std::size_t total = 0;

  std::size_t count(RecordKind k) const {
    const auto it = per_kind.find(k);
    return it == per_kind.end() ? 0 : it->second;
  }
  nlohmann::ordered_json to_json() const;
  bool operator==(const CountReport&) const = default;
};

CountReport count_records(std::span<const ConversationRecord> records);

struct GeneratedDataset {
  std::vector<ConversationRecord> records;
  CountReport counts;
};

/// All rule-based records in sample-major, kind-minor order (5 captions,
/// binary, quantify, localize, multi_turn), each sample followed by its
/// GPT-assisted records. GPT records for unknown samples go last.
GeneratedDataset assemble_dataset(const CorpusManifest& manifest, const GenerationConfig& config,
                                  std::span<const ConversationRecord> gpt_records = {});

} // namespace changekit
