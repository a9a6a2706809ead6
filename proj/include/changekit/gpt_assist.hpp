#pragma once

// In-context generation of extra instruction data through a chat model:
// a system message, hand-written seed examples, then one evidence block per
// sample. Replies must be a fenced JSON array of {"question", "answer"}.

#include "changekit/chat_endpoint.hpp"
#include "changekit/instructions.hpp"

#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace changekit {

enum class GptTaskKind { qa_from_captions, fine_grained };

std::string_view to_string(GptTaskKind k);
GptTaskKind gpt_task_from_string(std::string_view s);

struct SampleEvidence {
  std::string sample_id;
  std::array<std::string, 5> captions;
  std::optional<std::vector<CategoryCount>> counts;        // required for fine_grained
  std::optional<std::vector<NormalizedPolygon>> polygons;  // required for fine_grained (may be empty)
};

SampleEvidence make_evidence(const SampleBundle& sample, const SampleAnalysis& analysis);

/// Plain-text evidence block. Captions always; counts and polygons only for
/// fine_grained.
std::string render_evidence(const SampleEvidence& evidence, GptTaskKind kind, const CategoryPalette& palette,
                            int precision);

struct SeedExample {
  std::string evidence;
  std::string output;

  bool operator==(const SeedExample&) const = default;
};

/// Editable data file: {"task_kind", "system_message", "examples": [{"evidence", "output"}]}.
struct SeedSet {
  GptTaskKind task_kind = GptTaskKind::qa_from_captions;
  std::string system_message;
  std::vector<SeedExample> examples;

  static SeedSet load(const std::filesystem::path& path);
};

struct PromptBundle {
  GptTaskKind task_kind = GptTaskKind::qa_from_captions;
  std::string system_message;
  std::vector<SeedExample> seed_examples;
  std::string evidence;
  std::size_t pairs = 2;

  /// system, then (user evidence, assistant output) per seed, then the
  /// sample's evidence.
  ChatRequest to_request(double temperature) const;
  bool operator==(const PromptBundle&) const = default;
};

/// Throws MissingEvidence when captions are blank, seeds are empty, or
/// fine_grained evidence lacks counts or polygons.
PromptBundle build_prompt(const SampleEvidence& evidence, GptTaskKind kind, const SeedSet& seeds,
                          const CategoryPalette& palette, std::size_t pairs = 2, int precision = kDefaultPrecision);

/// Text of the final user message for an evidence block.
std::string evidence_request_text(std::string_view evidence, std::size_t pairs);

std::string request_generation(ChatEndpoint& endpoint, const EndpointConfig& config, const PromptBundle& prompt,
                               const Sleeper& sleep = real_sleeper());

struct ParsedGeneration {
  std::vector<ConversationRecord> records;
  std::vector<std::string> rejections;
};

using LogSink = std::function<void(const std::string&)>;

/// Extracts the JSON array (fenced or bare) and turns each valid pair into a
/// gpt_assisted record. Pairs containing any of `forbidden` substrings
/// (prompt scaffolding) are rejected. Throws UnparseableResponse when no
/// pair survives.
ParsedGeneration parse_generated(std::string_view response, const SampleBundle& sample, GptTaskKind kind,
                                 std::span<const std::string> forbidden = {}, const LogSink& log = {});

/// One raw response file per sample under <dir>/<task_kind>/<sample_id>.txt.
class ResponseCache {
public:
  explicit ResponseCache(std::filesystem::path dir);
  std::optional<std::string> get(GptTaskKind kind, const std::string& sample_id) const;
  void put(GptTaskKind kind, const std::string& sample_id, const std::string& response);

private:
  std::filesystem::path path_for(GptTaskKind kind, const std::string& sample_id) const;
  std::filesystem::path dir_;
  std::mutex write_mu_;
};

struct GptGenerationConfig {
  std::size_t qa_pairs = 2;
  std::size_t fine_grained_pairs = 2;
  int precision = kDefaultPrecision;
};

struct GptGenerationResult {
  std::vector<ConversationRecord> records; // sample order, qa_from_captions before fine_grained
  std::size_t requests_sent = 0;
  std::size_t cache_hits = 0;
  std::size_t raw_pairs = 0; // accepted + rejected
  std::vector<std::string> rejections;
};

/// Runs both task kinds for every sample, reusing cached responses.
/// Requests go through a LimitedEndpoint bounded by the endpoint config.
GptGenerationResult generate_gpt_records(const CorpusManifest& manifest, std::span<const SampleAnalysis> analyses,
                                         const SeedSet& qa_seeds, const SeedSet& fine_seeds, ChatEndpoint& endpoint,
                                         const EndpointConfig& endpoint_config, ResponseCache* cache,
                                         const GptGenerationConfig& config = {}, const LogSink& log = {},
                                         const Sleeper& sleep = real_sleeper());

/// Offline generator: answers from the evidence in the last user message.
/// Output depends only on the request, so runs are reproducible.
class StubGeneratorEndpoint final : public ChatEndpoint {
public:
  std::string complete(const ChatRequest& request) override;
};

} // namespace changekit
