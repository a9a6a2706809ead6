#include "changekit/gpt_assist.hpp"

#include "changekit/error.hpp"
#include "changekit/parallel.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <regex>
#include <sstream>

namespace changekit {

namespace fs = std::filesystem;

std::string_view to_string(GptTaskKind k) {
  return k == GptTaskKind::qa_from_captions ? "qa_from_captions" : "fine_grained";
}

GptTaskKind gpt_task_from_string(std::string_view s) {
  if (s == "qa_from_captions") return GptTaskKind::qa_from_captions;
  if (s == "fine_grained") return GptTaskKind::fine_grained;
  throw ConfigError("unknown GPT task kind '" + std::string(s) + "'");
}

SampleEvidence make_evidence(const SampleBundle& sample, const SampleAnalysis& analysis) {
  return {sample.sample_id, sample.captions, analysis.counts, analysis.polygons};
}

std::string render_evidence(const SampleEvidence& ev, GptTaskKind kind, const CategoryPalette& palette,
                            int precision) {
  std::string out = "Captions:\n";
  for (std::size_t i = 0; i < ev.captions.size(); ++i) out += std::to_string(i + 1) + ". " + ev.captions[i] + "\n";
  if (kind == GptTaskKind::fine_grained) {
    out += "Changed object counts:\n";
    for (const auto& c : *ev.counts)
      out += "- " + palette.category(c.category).plural + ": " + std::to_string(c.count) + "\n";
    out += "Changed object polygons (normalized x, y vertices):\n";
    if (ev.polygons->empty()) out += "- none\n";
    for (const auto& p : *ev.polygons)
      out += "- " + palette.category(p.category).name + ": " + serialize_polygon(p, precision) + "\n";
  }
  return out;
}

SeedSet SeedSet::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open seed file " + path.string());
  SeedSet s;
  try {
    const auto j = nlohmann::json::parse(in);
    s.task_kind = gpt_task_from_string(j.at("task_kind").get<std::string>());
    s.system_message = j.at("system_message").get<std::string>();
    for (const auto& ex : j.at("examples"))
      s.examples.push_back({ex.at("evidence").get<std::string>(), ex.at("output").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad seed file " + path.string() + ": " + e.what());
  }
  if (s.examples.empty()) throw ConfigError("seed file " + path.string() + " has no examples");
  return s;
}

std::string evidence_request_text(std::string_view evidence, std::size_t pairs) {
  std::string out = "Evidence:\n";
  out += evidence;
  out += "\nWrite " + std::to_string(pairs) + " question-answer pairs as a fenced JSON array.";
  return out;
}

ChatRequest PromptBundle::to_request(double temperature) const {
  ChatRequest req;
  req.temperature = temperature;
  req.messages.push_back({"system", system_message, {}});
  for (const auto& ex : seed_examples) {
    req.messages.push_back({"user", evidence_request_text(ex.evidence, pairs), {}});
    req.messages.push_back({"assistant", ex.output, {}});
  }
  req.messages.push_back({"user", evidence_request_text(evidence, pairs), {}});
  return req;
}

PromptBundle build_prompt(const SampleEvidence& evidence, GptTaskKind kind, const SeedSet& seeds,
                          const CategoryPalette& palette, std::size_t pairs, int precision) {
  for (const auto& c : evidence.captions)
    if (c.find_first_not_of(" \t\r\n") == std::string::npos)
      throw MissingEvidence("sample " + evidence.sample_id + " has an empty caption");
  if (seeds.examples.empty()) throw MissingEvidence("no seed examples supplied");
  if (kind == GptTaskKind::fine_grained && (!evidence.counts || !evidence.polygons))
    throw MissingEvidence("fine_grained prompts need object counts and polygons for " + evidence.sample_id);
  if (pairs == 0) throw ConfigError("pairs per request must be positive");

  PromptBundle p;
  p.task_kind = kind;
  p.system_message = seeds.system_message;
  p.seed_examples = seeds.examples;
  p.evidence = render_evidence(evidence, kind, palette, precision);
  p.pairs = pairs;
  return p;
}

std::string request_generation(ChatEndpoint& endpoint, const EndpointConfig& config, const PromptBundle& prompt,
                               const Sleeper& sleep) {
  return complete_with_retry(endpoint, prompt.to_request(config.temperature), config, sleep);
}

// --- response parsing ------------------------------------------------------------

namespace {

std::string_view json_payload(std::string_view text) {
  const auto fence = text.find("```");
  if (fence != std::string_view::npos) {
    auto body_start = text.find('\n', fence);
    if (body_start != std::string_view::npos) {
      ++body_start;
      const auto close = text.find("```", body_start);
      return text.substr(body_start, close == std::string_view::npos ? std::string_view::npos : close - body_start);
    }
  }
  const auto open = text.find('[');
  const auto close = text.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return {};
  return text.substr(open, close - open + 1);
}

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

} // namespace

ParsedGeneration parse_generated(std::string_view response, const SampleBundle& sample, GptTaskKind kind,
                                 std::span<const std::string> forbidden, const LogSink& log) {
  const auto payload = json_payload(response);
  if (payload.empty()) throw UnparseableResponse("no JSON array found in response for " + sample.sample_id);
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(payload);
  } catch (const nlohmann::json::exception& e) {
    throw UnparseableResponse("response for " + sample.sample_id + " is not valid JSON: " + e.what());
  }
  if (!arr.is_array()) throw UnparseableResponse("response for " + sample.sample_id + " is not a JSON array");

  ParsedGeneration out;
  auto reject = [&](std::size_t i, const std::string& why) {
    auto msg = sample.sample_id + " " + std::string(to_string(kind)) + " pair " + std::to_string(i) + ": " + why;
    if (log) log(msg);
    out.rejections.push_back(std::move(msg));
  };

  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& item = arr[i];
    if (!item.is_object() || !item.contains("question") || !item.contains("answer") ||
        !item["question"].is_string() || !item["answer"].is_string()) {
      reject(i, "expected an object with string 'question' and 'answer'");
      continue;
    }
    const auto q = trimmed(item["question"].get<std::string>());
    const auto a = trimmed(item["answer"].get<std::string>());
    bool leaked = false;
    for (const auto& f : forbidden)
      if (!f.empty() && (q.find(f) != std::string::npos || a.find(f) != std::string::npos)) leaked = true;
    if (leaked) {
      reject(i, "pair repeats prompt scaffolding");
      continue;
    }

    ConversationRecord r;
    r.record_id = sample.sample_id + "-gpt-" + std::string(to_string(kind)) + "-" + std::to_string(out.records.size());
    r.sample_id = sample.sample_id;
    r.kind = RecordKind::gpt_assisted;
    r.provenance = Provenance::gpt_assisted;
    r.image_a = sample.image_a.string();
    r.image_b = sample.image_b.string();
    r.turns.push_back({Speaker::human, with_image_placeholders(q)});
    r.turns.push_back({Speaker::assistant, a});
    if (const auto problems = check_record_strict(r); !problems.empty()) {
      reject(i, problems.front());
      continue;
    }
    out.records.push_back(std::move(r));
  }
  if (out.records.empty())
    throw UnparseableResponse("no valid question-answer pair in response for " + sample.sample_id);
  return out;
}

// --- cache -------------------------------------------------------------------------

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path ResponseCache::path_for(GptTaskKind kind, const std::string& sample_id) const {
  return dir_ / std::string(to_string(kind)) / (sample_id + ".txt");
}

std::optional<std::string> ResponseCache::get(GptTaskKind kind, const std::string& sample_id) const {
  const auto p = path_for(kind, sample_id);
  if (!fs::exists(p)) return std::nullopt;
  const auto bytes = read_file_bytes(p);
  return std::string(bytes.begin(), bytes.end());
}

void ResponseCache::put(GptTaskKind kind, const std::string& sample_id, const std::string& response) {
  std::lock_guard lock(write_mu_);
  const auto p = path_for(kind, sample_id);
  fs::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  write_file_bytes(tmp, std::span(reinterpret_cast<const std::uint8_t*>(response.data()), response.size()));
  fs::rename(tmp, p);
}

// --- batch generation ------------------------------------------------------------

GptGenerationResult generate_gpt_records(const CorpusManifest& manifest, std::span<const SampleAnalysis> analyses,
                                         const SeedSet& qa_seeds, const SeedSet& fine_seeds, ChatEndpoint& endpoint,
                                         const EndpointConfig& endpoint_config, ResponseCache* cache,
                                         const GptGenerationConfig& config, const LogSink& log, const Sleeper& sleep) {
  if (analyses.size() != manifest.samples.size())
    throw LengthMismatch("one analysis per manifest sample is required");

  std::vector<std::string> forbidden{"Evidence:", qa_seeds.system_message, fine_seeds.system_message};
  for (const auto* seeds : {&qa_seeds, &fine_seeds})
    for (const auto& ex : seeds->examples) forbidden.push_back(ex.evidence);

  struct PerSample {
    std::vector<ConversationRecord> records;
    std::vector<std::string> rejections;
    std::size_t requests = 0, hits = 0, raw = 0;
  };
  std::vector<PerSample> results(manifest.samples.size());
  LimitedEndpoint limited(endpoint, endpoint_config.max_concurrency);

  parallel_for(manifest.samples.size(), static_cast<std::size_t>(endpoint_config.max_concurrency), [&](std::size_t i) {
    const auto& sample = manifest.samples[i];
    const auto evidence = make_evidence(sample, analyses[i]);
    auto& res = results[i];
    for (const auto kind : {GptTaskKind::qa_from_captions, GptTaskKind::fine_grained}) {
      const auto& seeds = kind == GptTaskKind::qa_from_captions ? qa_seeds : fine_seeds;
      const auto pairs = kind == GptTaskKind::qa_from_captions ? config.qa_pairs : config.fine_grained_pairs;
      if (pairs == 0) continue;
      const auto prompt = build_prompt(evidence, kind, seeds, manifest.palette, pairs, config.precision);

      std::optional<std::string> response = cache ? cache->get(kind, sample.sample_id) : std::nullopt;
      if (response) {
        ++res.hits;
      } else {
        response = request_generation(limited, endpoint_config, prompt, sleep);
        ++res.requests;
        if (cache) cache->put(kind, sample.sample_id, *response);
      }
      try {
        auto parsed = parse_generated(*response, sample, kind, forbidden, log);
        res.raw += parsed.records.size() + parsed.rejections.size();
        for (auto& r : parsed.records) res.records.push_back(std::move(r));
        for (auto& r : parsed.rejections) res.rejections.push_back(std::move(r));
      } catch (const UnparseableResponse& e) {
        if (log) log(e.what());
        res.rejections.emplace_back(e.what());
      }
    }
  });

  GptGenerationResult out;
  for (auto& r : results) {
    for (auto& rec : r.records) out.records.push_back(std::move(rec));
    for (auto& rej : r.rejections) out.rejections.push_back(std::move(rej));
    out.requests_sent += r.requests;
    out.cache_hits += r.hits;
    out.raw_pairs += r.raw;
  }
  return out;
}

// --- offline stub ----------------------------------------------------------------------

std::string StubGeneratorEndpoint::complete(const ChatRequest& request) {
  if (request.messages.empty()) throw MalformedResponse("empty request");
  const auto& text = request.messages.back().content;

  std::size_t pairs = 2;
  static const std::regex kPairs(R"(Write (\d+) question-answer pairs)");
  std::smatch m;
  if (std::regex_search(text, m, kPairs)) pairs = std::stoul(m[1].str());

  std::vector<std::string> captions;
  std::vector<std::pair<std::string, std::string>> counts; // plural, count
  std::vector<std::pair<std::string, std::string>> polygons; // name, polygon text
  enum { none, caps, cnts, polys } section = none;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("Captions:", 0) == 0) section = caps;
    else if (line.rfind("Changed object counts:", 0) == 0) section = cnts;
    else if (line.rfind("Changed object polygons", 0) == 0) section = polys;
    else if (section == caps && line.size() > 3 && std::isdigit(static_cast<unsigned char>(line[0])))
      captions.push_back(line.substr(line.find(". ") + 2));
    else if ((section == cnts || section == polys) && line.rfind("- ", 0) == 0) {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) continue;
      auto entry = std::make_pair(line.substr(2, colon - 2), line.substr(colon + 2));
      (section == cnts ? counts : polygons).push_back(std::move(entry));
    } else if (line.empty() || line.rfind("Write ", 0) == 0) {
      section = none;
    }
  }

  nlohmann::json arr = nlohmann::json::array();
  if (counts.empty()) {
    static constexpr std::array<const char*, 3> kQuestions{
        "What is the main change between the two images?",
        "How would you summarize what happened in this scene?",
        "What can be observed when comparing the two images?",
    };
    for (std::size_t i = 0; i < pairs && !captions.empty(); ++i)
      arr.push_back({{"question", kQuestions[i % kQuestions.size()]}, {"answer", captions[i % captions.size()]}});
  } else {
    std::vector<std::pair<std::string, std::string>> candidates;
    for (const auto& [plural, n] : counts)
      candidates.emplace_back("How many " + plural + " have changed?", "The number of changed " + plural + " is " + n + ".");
    for (const auto& [name, poly] : polygons)
      candidates.emplace_back("Where is a changed " + name + " located?", "It is outlined by " + poly + ".");
    for (std::size_t i = 0; i < pairs && i < candidates.size(); ++i)
      arr.push_back({{"question", candidates[i].first}, {"answer", candidates[i].second}});
  }
  return "```json\n" + arr.dump(2) + "\n```";
}

} // namespace changekit
