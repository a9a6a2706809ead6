#pragma once

// Drives a chat endpoint through the evaluation protocols (single-shot tasks
// and the three-round chain-of-thought captioning session), persists the
// transcripts and scores them against the corpus ground truth.

#include "changekit/chat_endpoint.hpp"
#include "changekit/dataset_io.hpp"
#include "changekit/instructions.hpp"
#include "changekit/metrics.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace changekit {

enum class EvalTask { caption_direct, caption_cot, binary, quantify, localize };

std::string_view to_string(EvalTask t);
EvalTask eval_task_from_string(std::string_view s);

/// How the two images reach the endpoint: two attachments on the first user
/// message, or one side-by-side image written to `stitch_dir`.
enum class ImageMode { attachments, stitched };

std::string_view to_string(ImageMode m);
ImageMode image_mode_from_string(std::string_view s);

/// Prompt wordings. `{categories}` expands to the palette phrase.
struct EvalPrompts {
  std::string binary{kBinaryQuestions[0]};
  std::string objects{kObjectQuestion};
  std::string caption{kCaptionQuestion};
  std::string quantify{kQuantifyQuestions[0]};
  std::string localize{kLocalizeQuestions[0]};

  /// Keys prompt.binary, prompt.objects, prompt.caption, prompt.quantify,
  /// prompt.localize; missing keys keep the defaults.
  static EvalPrompts from_config(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;

  bool operator==(const EvalPrompts&) const = default;
};

struct EvalOptions {
  EvalPrompts prompts;
  ImageMode image_mode = ImageMode::attachments;
  std::filesystem::path stitch_dir; // required for ImageMode::stitched
  EndpointConfig endpoint;          // retry, backoff, concurrency, temperature
  GenerationConfig generation;      // connectivity and min_area for ground-truth counts
  std::size_t jobs = 1;
  Sleeper sleep = real_sleeper();
};

struct Round {
  std::string prompt;
  std::string response;

  bool operator==(const Round&) const = default;
};

/// One session. A failed session keeps the rounds completed before the
/// failure.
struct Transcript {
  std::string sample_id;
  EvalTask task = EvalTask::caption_direct;
  std::vector<Round> rounds;
  bool failed = false;
  std::string error;

  /// Response of the last round (the caption for caption tasks).
  std::string final_response() const { return rounds.empty() ? std::string() : rounds.back().response; }

  bool operator==(const Transcript&) const = default;
};

nlohmann::ordered_json transcript_to_json(const Transcript& t);
Transcript transcript_from_json(const nlohmann::json& j);
void write_transcripts(std::span<const Transcript> transcripts, const std::filesystem::path& path);
std::vector<Transcript> read_transcripts(const std::filesystem::path& path);

/// The prompts a task sends, in round order.
std::vector<std::string> task_prompts(EvalTask task, const EvalOptions& options, const CategoryPalette& palette);

/// The images attached to the first user message.
std::vector<std::string> session_images(const SampleBundle& sample, const EvalOptions& options);

/// Runs the rounds of `task` in order, each request carrying the whole prior
/// conversation. Endpoint errors end the session and mark it failed.
Transcript run_session(ChatEndpoint& endpoint, const SampleBundle& sample, EvalTask task, const EvalOptions& options,
                       const CategoryPalette& palette);

/// Binary question -> road/building change and counts -> caption.
Transcript run_cot_session(ChatEndpoint& endpoint, const SampleBundle& sample, const EvalOptions& options,
                           const CategoryPalette& palette);

/// Sessions for every sample, concurrently up to `jobs` and the endpoint's
/// max_concurrency. Output is in sample order.
std::vector<Transcript> run_sessions(ChatEndpoint& endpoint, std::span<const SampleBundle> samples, EvalTask task,
                                     const EvalOptions& options, const CategoryPalette& palette);

/// Pure scoring of saved transcripts against the manifest ground truth.
///
/// Captions: failed sessions and empty answers are counted and left out of
/// the caption metrics. Binary: unparseable or failed answers count as wrong.
/// Quantify: they count as a prediction of zero (error = ground-truth
/// count). Localize: they score IoU 0.
MetricsReport score_transcripts(EvalTask task, std::span<const Transcript> transcripts, const CorpusManifest& manifest,
                                const EvalOptions& options);

/// Category-aware IoU: summed per-category intersections over summed unions;
/// 1.0 when prediction and ground truth are both empty.
double localization_iou(std::span<const NormalizedPolygon> predicted, const LabelGrid& grid,
                        const CategoryPalette& palette);

/// Runs one split (every manifest sample when `split` is empty), writes the
/// transcripts (if a path is given) and scores them.
MetricsReport evaluate_task(ChatEndpoint& endpoint, const CorpusManifest& manifest, EvalTask task,
                            const EvalOptions& options, const std::optional<std::filesystem::path>& transcripts_out = {},
                            std::optional<Split> split = Split::test);

/// Answers every evaluation prompt from the ground truth, identifying the
/// sample by its first attached image.
class OracleEndpoint final : public ChatEndpoint {
public:
  OracleEndpoint(const CorpusManifest& manifest, EvalOptions options);
  std::string complete(const ChatRequest& request) override;

private:
  struct Answers {
    std::string binary, counts, caption, localize;
  };
  std::map<std::string, Answers> by_image_;
  EvalOptions options_;
  CategoryPalette palette_;
};

/// Returns the same text for every request.
class ConstantEndpoint final : public ChatEndpoint {
public:
  explicit ConstantEndpoint(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const ChatRequest&) override { return reply_; }

private:
  std::string reply_;
};

} // namespace changekit
