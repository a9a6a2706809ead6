#include "changekit/instructions.hpp"

#include "changekit/error.hpp"
#include "changekit/parallel.hpp"

#include <algorithm>
#include <unordered_map>

namespace changekit {

const std::array<std::string_view, 10> kBinaryQuestions{
    "Have any changes occurred between these two images? Please answer yes or no.",
    "Is there any change between the two images? Please answer yes or no.",
    "Did anything change in this area between the two acquisition times? Please answer yes or no.",
    "Compare the two images. Has the scene changed? Please answer yes or no.",
    "Are there any differences between the earlier and the later image? Please answer yes or no.",
    "Has any land-cover change taken place between these two images? Please answer yes or no.",
    "Do these bitemporal images show any change? Please answer yes or no.",
    "Were any objects added or removed between the two images? Please answer yes or no.",
    "Is the second image different from the first one? Please answer yes or no.",
    "Looking at both images, can you detect any change? Please answer yes or no.",
};

const std::array<std::string_view, 10> kQuantifyQuestions{
    "How many {categories} have changed between these two images?",
    "Count the changed {categories} in these two images.",
    "What is the number of changed {categories} in this area?",
    "Please count how many {categories} changed between the two images.",
    "How many {categories} were added or altered between the two acquisition times?",
    "Give the number of changed {categories} between the earlier and the later image.",
    "Can you count the {categories} that have changed?",
    "How many changed {categories} can be seen when comparing these two images?",
    "Quantify the changed {categories} between the two images.",
    "Tell me how many {categories} changed from the first image to the second.",
};

const std::array<std::string_view, 10> kLocalizeQuestions{
    "Please outline the changed {categories} in these two images with polygons.",
    "Where are the changed {categories}? Describe each one as a polygon.",
    "Delineate the contours of the changed {categories} between these two images.",
    "Give the polygon coordinates of every changed object among the {categories}.",
    "Locate the changed {categories} and outline each of them with a polygon.",
    "Mark the regions of the changed {categories} using polygon vertices.",
    "Provide polygons that localize the changed {categories} in the second image.",
    "Outline where the {categories} changed, using normalized polygon coordinates.",
    "Which areas contain changed {categories}? Answer with polygons.",
    "Draw polygons around the changed {categories} between the two images.",
};

std::size_t stable_choice(std::uint64_t seed, std::string_view salt, std::string_view sample_id, std::size_t n) {
  if (n == 0) return 0;
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](unsigned char b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(seed >> (8 * i)));
  for (char c : salt) mix(static_cast<unsigned char>(c));
  mix(0);
  for (char c : sample_id) mix(static_cast<unsigned char>(c));
  return static_cast<std::size_t>(h % n);
}

std::string category_phrase(const CategoryPalette& palette) {
  const auto cats = palette.change_categories();
  std::string out;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    if (i > 0) out += i + 1 == cats.size() ? " and " : ", ";
    out += cats[i].plural;
  }
  return out;
}

std::string expand_categories(std::string_view templ, const CategoryPalette& palette) {
  std::string out(templ);
  const std::string token = "{categories}";
  const auto phrase = category_phrase(palette);
  for (auto pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos + phrase.size()))
    out.replace(pos, token.size(), phrase);
  return out;
}

SampleAnalysis analyze_change_map(const LabelGrid& grid, const CategoryPalette& palette,
                                  const GenerationConfig& config) {
  SampleAnalysis a;
  a.changed = grid.has_change();
  const double epsilon = config.epsilon_for({grid.width(), grid.height()});
  for (const auto& cat : palette.change_categories()) {
    const auto comps = connected_components(grid, cat.id, config.connectivity, config.min_area);
    a.counts.push_back({cat.id, comps.size()});
    for (const auto& c : comps) a.polygons.push_back(component_polygon(c, grid.width(), grid.height(), epsilon));
  }
  return a;
}

std::string quantity_sentence(std::span<const CategoryCount> counts, const CategoryPalette& palette) {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i > 0) out += counts.size() == 2 ? ", and " : (i + 1 == counts.size() ? ", and " : ", ");
    out += i == 0 ? "The" : "the";
    out += " number of changed " + palette.category(counts[i].category).plural + " is " +
           std::to_string(counts[i].count);
  }
  out += '.';
  return out;
}

std::string localization_answer(std::span<const NormalizedPolygon> polygons, const CategoryPalette& palette,
                                int precision) {
  if (polygons.empty()) return std::string(kNoChangeLocalization);
  std::string out;
  for (const auto& cat : palette.change_categories()) {
    if (!out.empty()) out += '\n';
    out += "Changed " + cat.plural + ": ";
    bool any = false;
    for (const auto& p : polygons) {
      if (p.category != cat.id) continue;
      if (any) out += ", ";
      out += serialize_polygon(p, precision);
      any = true;
    }
    out += any ? "." : "none.";
  }
  return out;
}

namespace {

ConversationRecord base_record(const SampleBundle& sample, RecordKind kind, std::string record_id) {
  ConversationRecord r;
  r.record_id = std::move(record_id);
  r.sample_id = sample.sample_id;
  r.kind = kind;
  r.provenance = Provenance::rule_based;
  r.image_a = sample.image_a.string();
  r.image_b = sample.image_b.string();
  return r;
}

void exchange(ConversationRecord& r, std::string question, std::string answer) {
  if (r.turns.empty()) question = with_image_placeholders(question);
  r.turns.push_back({Speaker::human, std::move(question)});
  r.turns.push_back({Speaker::assistant, std::move(answer)});
}

std::vector<CategoryCount> count_categories(const LabelGrid& grid, const CategoryPalette& palette,
                                            const GenerationConfig& config) {
  std::vector<CategoryCount> counts;
  for (const auto& cat : palette.change_categories())
    counts.push_back({cat.id, count_objects(grid, cat.id, config.connectivity, config.min_area)});
  return counts;
}

std::string binary_question(const SampleBundle& sample, const GenerationConfig& config, std::string_view salt) {
  return std::string(kBinaryQuestions[stable_choice(config.seed, salt, sample.sample_id, kBinaryQuestions.size())]);
}

} // namespace

std::array<ConversationRecord, 5> gen_caption_records(const SampleBundle& sample) {
  std::array<ConversationRecord, 5> out;
  for (std::size_t i = 0; i < 5; ++i) {
    out[i] = base_record(sample, RecordKind::caption, sample.sample_id + "-caption-" + std::to_string(i));
    exchange(out[i], std::string(kCaptionQuestion), sample.captions[i]);
  }
  return out;
}

ConversationRecord gen_binary_record(const SampleBundle& sample, const LabelGrid& grid,
                                     const GenerationConfig& config) {
  auto r = base_record(sample, RecordKind::binary, sample.sample_id + "-binary");
  exchange(r, binary_question(sample, config, "binary"), grid.has_change() ? "yes" : "no");
  return r;
}

ConversationRecord gen_quantify_record(const SampleBundle& sample, const LabelGrid& grid,
                                       const CategoryPalette& palette, const GenerationConfig& config) {
  auto r = base_record(sample, RecordKind::quantify, sample.sample_id + "-quantify");
  const auto& templ =
      kQuantifyQuestions[stable_choice(config.seed, "quantify", sample.sample_id, kQuantifyQuestions.size())];
  const auto counts = count_categories(grid, palette, config);
  exchange(r, expand_categories(templ, palette), quantity_sentence(counts, palette));
  return r;
}

ConversationRecord gen_localize_record(const SampleBundle& sample, std::span<const NormalizedPolygon> polygons,
                                       const CategoryPalette& palette, const GenerationConfig& config) {
  auto r = base_record(sample, RecordKind::localize, sample.sample_id + "-localize");
  const auto& templ =
      kLocalizeQuestions[stable_choice(config.seed, "localize", sample.sample_id, kLocalizeQuestions.size())];
  exchange(r, expand_categories(templ, palette), localization_answer(polygons, palette, config.precision));
  return r;
}

ConversationRecord gen_multiturn_record(const SampleBundle& sample, const LabelGrid& grid,
                                        const CategoryPalette& palette, const GenerationConfig& config) {
  auto r = base_record(sample, RecordKind::multi_turn, sample.sample_id + "-multi_turn");
  exchange(r, binary_question(sample, config, "multi_turn"), grid.has_change() ? "yes" : "no");
  const auto counts = count_categories(grid, palette, config);
  exchange(r, expand_categories(kObjectQuestion, palette), quantity_sentence(counts, palette));
  const auto pick = stable_choice(config.seed, "multi_turn_caption", sample.sample_id, sample.captions.size());
  exchange(r, std::string(kCaptionQuestion), sample.captions[pick]);
  return r;
}

nlohmann::ordered_json CountReport::to_json() const {
  nlohmann::ordered_json j;
  for (auto k : kAllKinds) j[std::string(to_string(k))] = count(k);
  j["rule_based"] = rule_based;
  j["gpt_assisted_provenance"] = gpt_assisted;
  j["total"] = total;
  return j;
}

CountReport count_records(std::span<const ConversationRecord> records) {
  CountReport c;
  for (auto k : kAllKinds) c.per_kind[k] = 0;
  for (const auto& r : records) {
    ++c.per_kind[r.kind];
    if (r.provenance == Provenance::rule_based) ++c.rule_based;
    else ++c.gpt_assisted;
  }
  c.total = records.size();
  return c;
}

GeneratedDataset assemble_dataset(const CorpusManifest& manifest, const GenerationConfig& config,
                                  std::span<const ConversationRecord> gpt_records) {
  const auto& samples = manifest.samples;
  std::vector<std::vector<ConversationRecord>> per_sample(samples.size());

  parallel_for(samples.size(), config.jobs, [&](std::size_t i) {
    const auto& s = samples[i];
    const auto grid = load_change_map(s, manifest);
    auto& out = per_sample[i];
    for (auto& r : gen_caption_records(s)) out.push_back(std::move(r));
    out.push_back(gen_binary_record(s, grid, config));
    if (config.skip_unchanged && !grid.has_change()) return;
    const auto analysis = analyze_change_map(grid, manifest.palette, config);
    out.push_back(gen_quantify_record(s, grid, manifest.palette, config));
    out.push_back(gen_localize_record(s, analysis.polygons, manifest.palette, config));
    out.push_back(gen_multiturn_record(s, grid, manifest.palette, config));
  });

  std::unordered_map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < samples.size(); ++i) index_of.emplace(samples[i].sample_id, i);
  std::vector<std::vector<ConversationRecord>> gpt_by_sample(samples.size());
  std::vector<ConversationRecord> orphans;
  for (const auto& r : gpt_records) {
    const auto it = index_of.find(r.sample_id);
    if (it == index_of.end()) orphans.push_back(r);
    else gpt_by_sample[it->second].push_back(r);
  }

  GeneratedDataset ds;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (auto& r : per_sample[i]) ds.records.push_back(std::move(r));
    for (auto& r : gpt_by_sample[i]) ds.records.push_back(std::move(r));
  }
  for (auto& r : orphans) ds.records.push_back(std::move(r));
  ds.counts = count_records(ds.records);
  return ds;
}

} // namespace changekit
