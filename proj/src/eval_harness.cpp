#include "changekit/eval_harness.hpp"

#include "changekit/answer_parsing.hpp"
#include "changekit/error.hpp"
#include "changekit/parallel.hpp"
#include "changekit/png_io.hpp"

#include <fstream>
#include <unordered_map>

namespace changekit {

namespace {

constexpr std::array<std::pair<EvalTask, std::string_view>, 5> kTaskNames{{
    {EvalTask::caption_direct, "caption_direct"},
    {EvalTask::caption_cot, "caption_cot"},
    {EvalTask::binary, "binary"},
    {EvalTask::quantify, "quantify"},
    {EvalTask::localize, "localize"},
}};

bool is_caption_task(EvalTask t) { return t == EvalTask::caption_direct || t == EvalTask::caption_cot; }

std::filesystem::path stitched_path(const SampleBundle& sample, const EvalOptions& options) {
  return options.stitch_dir / (sample.sample_id + ".png");
}

// Writes image_a | image_b side by side (black padding if heights differ).
void stitch_pair(const SampleBundle& sample, const std::filesystem::path& out) {
  const auto a = decode_png_rgb(read_file_bytes(sample.image_a));
  const auto b = decode_png_rgb(read_file_bytes(sample.image_b));
  auto img = RgbImage::filled(a.width + b.width, std::max(a.height, b.height), 0);
  for (std::size_t y = 0; y < a.height; ++y)
    for (std::size_t x = 0; x < a.width; ++x) img.set_pixel(x, y, a.pixel(x, y));
  for (std::size_t y = 0; y < b.height; ++y)
    for (std::size_t x = 0; x < b.width; ++x) img.set_pixel(a.width + x, y, b.pixel(x, y));
  const auto tmp = out.string() + ".tmp";
  write_file_bytes(tmp, encode_png_rgb(img));
  std::filesystem::rename(tmp, out);
}

const SampleBundle& find_sample(const std::unordered_map<std::string, const SampleBundle*>& index,
                                const std::string& id) {
  const auto it = index.find(id);
  if (it == index.end()) throw Error("transcript for unknown sample " + id);
  return *it->second;
}

} // namespace

std::string_view to_string(EvalTask t) {
  for (const auto& [k, name] : kTaskNames)
    if (k == t) return name;
  return "?";
}

EvalTask eval_task_from_string(std::string_view s) {
  for (const auto& [k, name] : kTaskNames)
    if (name == s) return k;
  throw ConfigError("unknown task: " + std::string(s));
}

std::string_view to_string(ImageMode m) { return m == ImageMode::attachments ? "attachments" : "stitched"; }

ImageMode image_mode_from_string(std::string_view s) {
  if (s == "attachments") return ImageMode::attachments;
  if (s == "stitched") return ImageMode::stitched;
  throw ConfigError("unknown image mode: " + std::string(s));
}

EvalPrompts EvalPrompts::from_config(const KeyValueConfig& cfg) {
  EvalPrompts p;
  p.binary = cfg.get_or("prompt.binary", p.binary);
  p.objects = cfg.get_or("prompt.objects", p.objects);
  p.caption = cfg.get_or("prompt.caption", p.caption);
  p.quantify = cfg.get_or("prompt.quantify", p.quantify);
  p.localize = cfg.get_or("prompt.localize", p.localize);
  return p;
}

KeyValueConfig EvalPrompts::to_config() const {
  KeyValueConfig c;
  c.set("prompt.binary", binary);
  c.set("prompt.objects", objects);
  c.set("prompt.caption", caption);
  c.set("prompt.quantify", quantify);
  c.set("prompt.localize", localize);
  return c;
}

nlohmann::ordered_json transcript_to_json(const Transcript& t) {
  nlohmann::ordered_json j;
  j["sample_id"] = t.sample_id;
  j["task"] = std::string(to_string(t.task));
  auto rounds = nlohmann::ordered_json::array();
  for (const auto& r : t.rounds) {
    nlohmann::ordered_json o;
    o["prompt"] = r.prompt;
    o["response"] = r.response;
    rounds.push_back(std::move(o));
  }
  j["rounds"] = std::move(rounds);
  j["failed"] = t.failed;
  j["error"] = t.error;
  return j;
}

Transcript transcript_from_json(const nlohmann::json& j) {
  Transcript t;
  t.sample_id = j.at("sample_id").get<std::string>();
  t.task = eval_task_from_string(j.at("task").get<std::string>());
  for (const auto& r : j.at("rounds")) t.rounds.push_back({r.at("prompt").get<std::string>(), r.at("response").get<std::string>()});
  t.failed = j.at("failed").get<bool>();
  t.error = j.value("error", std::string());
  return t;
}

void write_transcripts(std::span<const Transcript> transcripts, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path.string());
  for (const auto& t : transcripts) out << transcript_to_json(t).dump() << '\n';
  if (!out) throw IoFailure("write failed: " + path.string());
}

std::vector<Transcript> read_transcripts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path.string());
  std::vector<Transcript> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(transcript_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw MalformedLine(n, e.what());
    } catch (const ConfigError& e) {
      throw MalformedLine(n, e.what());
    }
  }
  return out;
}

std::vector<std::string> task_prompts(EvalTask task, const EvalOptions& options, const CategoryPalette& palette) {
  const auto& p = options.prompts;
  switch (task) {
  case EvalTask::caption_direct: return {p.caption};
  case EvalTask::caption_cot: return {p.binary, expand_categories(p.objects, palette), p.caption};
  case EvalTask::binary: return {p.binary};
  case EvalTask::quantify: return {expand_categories(p.quantify, palette)};
  case EvalTask::localize: return {expand_categories(p.localize, palette)};
  }
  return {};
}

std::vector<std::string> session_images(const SampleBundle& sample, const EvalOptions& options) {
  if (options.image_mode == ImageMode::attachments) return {sample.image_a.string(), sample.image_b.string()};
  if (options.stitch_dir.empty()) throw ConfigError("stitched image mode needs a stitch directory");
  const auto out = stitched_path(sample, options);
  if (!std::filesystem::exists(out)) {
    std::filesystem::create_directories(options.stitch_dir);
    stitch_pair(sample, out);
  }
  return {out.string()};
}

Transcript run_session(ChatEndpoint& endpoint, const SampleBundle& sample, EvalTask task, const EvalOptions& options,
                       const CategoryPalette& palette) {
  Transcript t;
  t.sample_id = sample.sample_id;
  t.task = task;
  ChatRequest request;
  request.temperature = options.endpoint.temperature;
  try {
    for (const auto& prompt : task_prompts(task, options, palette)) {
      ChatMessage user{"user", prompt, {}};
      if (request.messages.empty()) user.images = session_images(sample, options);
      request.messages.push_back(std::move(user));
      auto reply = complete_with_retry(endpoint, request, options.endpoint, options.sleep);
      t.rounds.push_back({prompt, reply});
      request.messages.push_back({"assistant", std::move(reply), {}});
    }
  } catch (const Error& e) {
    t.failed = true;
    t.error = e.what();
  }
  return t;
}

Transcript run_cot_session(ChatEndpoint& endpoint, const SampleBundle& sample, const EvalOptions& options,
                           const CategoryPalette& palette) {
  return run_session(endpoint, sample, EvalTask::caption_cot, options, palette);
}

std::vector<Transcript> run_sessions(ChatEndpoint& endpoint, std::span<const SampleBundle> samples, EvalTask task,
                                     const EvalOptions& options, const CategoryPalette& palette) {
  LimitedEndpoint limited(endpoint, options.endpoint.max_concurrency);
  std::vector<Transcript> out(samples.size());
  parallel_for(samples.size(), options.jobs,
               [&](std::size_t i) { out[i] = run_session(limited, samples[i], task, options, palette); });
  return out;
}

double localization_iou(std::span<const NormalizedPolygon> predicted, const LabelGrid& grid,
                        const CategoryPalette& palette) {
  std::size_t inter = 0, uni = 0;
  for (const auto& cat : palette.change_categories()) {
    std::vector<NormalizedPolygon> mine;
    for (const auto& p : predicted)
      if (p.category == cat.id) mine.push_back(p);
    const auto mask = rasterize_polygons(mine, grid.width(), grid.height());
    const auto o = mask_overlap(mask, grid, cat.id);
    inter += o.intersection;
    uni += o.union_;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

MetricsReport score_transcripts(EvalTask task, std::span<const Transcript> transcripts, const CorpusManifest& manifest,
                                const EvalOptions& options) {
  std::unordered_map<std::string, const SampleBundle*> index;
  for (const auto& s : manifest.samples) index.emplace(s.sample_id, &s);
  const auto cats = manifest.palette.change_categories();

  MetricsReport report;
  report.task = std::string(to_string(task));
  report.samples = transcripts.size();

  std::vector<EvalPair> pairs;
  std::vector<bool> bin_pred, bin_gt;
  std::map<std::string, std::vector<long long>> count_pred, count_gt;
  double iou_sum = 0;

  for (const auto& t : transcripts) {
    if (t.task != task) throw Error("transcript task " + std::string(to_string(t.task)) + " does not match " + report.task);
    const auto& sample = find_sample(index, t.sample_id);
    if (t.failed) ++report.failed;
    const auto answer = t.failed ? std::string() : t.final_response();

    if (is_caption_task(task)) {
      if (t.failed) continue;
      auto pair = make_eval_pair(t.sample_id, answer, sample.captions);
      if (pair.hypothesis.empty()) {
        ++report.unparseable;
        continue;
      }
      pairs.push_back(std::move(pair));
      continue;
    }

    const auto grid = load_change_map(sample, manifest);
    switch (task) {
    case EvalTask::binary: {
      const bool gt = grid.has_change();
      bool pred = !gt;
      if (!t.failed) {
        try {
          pred = parse_yes_no(answer);
        } catch (const Unparseable&) {
          ++report.unparseable;
        }
      }
      bin_pred.push_back(pred);
      bin_gt.push_back(gt);
      break;
    }
    case EvalTask::quantify: {
      bool bad = false;
      for (const auto& c : cats) {
        const auto gt = static_cast<long long>(
            count_objects(grid, c.id, options.generation.connectivity, options.generation.min_area));
        long long pred = 0;
        if (!t.failed) {
          try {
            pred = parse_count(answer, c);
          } catch (const Unparseable&) {
            bad = true;
          }
        }
        count_pred[c.plural].push_back(pred);
        count_gt[c.plural].push_back(gt);
      }
      if (bad) ++report.unparseable;
      break;
    }
    case EvalTask::localize: {
      if (t.failed) break;
      try {
        iou_sum += localization_iou(parse_localization(answer, manifest.palette), grid, manifest.palette);
      } catch (const Unparseable&) {
        ++report.unparseable;
      }
      break;
    }
    default: break;
    }
  }

  if (is_caption_task(task) && !pairs.empty()) {
    report.bleu1 = bleu1(pairs);
    report.meteor = meteor(pairs);
    report.rouge_l = rouge_l(pairs);
    if (pairs.size() >= 2) report.cider_d = cider_d(pairs);
  }
  if (task == EvalTask::binary && !bin_pred.empty()) {
    const auto s = binary_scores(bin_pred, bin_gt);
    report.accuracy = s.accuracy;
    report.recall = s.recall;
  }
  if (task == EvalTask::quantify)
    for (const auto& [name, preds] : count_pred)
      if (!preds.empty()) report.mae[name] = mae(preds, count_gt[name]);
  if (task == EvalTask::localize && !transcripts.empty())
    report.mean_iou = iou_sum / static_cast<double>(transcripts.size());
  return report;
}

MetricsReport evaluate_task(ChatEndpoint& endpoint, const CorpusManifest& manifest, EvalTask task,
                            const EvalOptions& options, const std::optional<std::filesystem::path>& transcripts_out,
                            std::optional<Split> split) {
  const auto samples = split ? manifest.split(*split) : manifest.samples;
  if (samples.empty()) throw EmptyInput("no samples to evaluate");
  const auto transcripts = run_sessions(endpoint, samples, task, options, manifest.palette);
  if (transcripts_out) write_transcripts(transcripts, *transcripts_out);
  return score_transcripts(task, transcripts, manifest, options);
}

OracleEndpoint::OracleEndpoint(const CorpusManifest& manifest, EvalOptions options)
    : options_(std::move(options)), palette_(manifest.palette) {
  for (const auto& s : manifest.samples) {
    const auto grid = load_change_map(s, manifest);
    const auto analysis = analyze_change_map(grid, palette_, options_.generation);
    Answers a;
    a.binary = analysis.changed ? "yes" : "no";
    a.counts = quantity_sentence(analysis.counts, palette_);
    a.caption = s.captions[0];
    a.localize = localization_answer(analysis.polygons, palette_, options_.generation.precision);
    by_image_[s.image_a.string()] = a;
    if (!options_.stitch_dir.empty()) by_image_[stitched_path(s, options_).string()] = a;
  }
}

std::string OracleEndpoint::complete(const ChatRequest& request) {
  const ChatMessage* first = nullptr;
  const ChatMessage* last = nullptr;
  for (const auto& m : request.messages) {
    if (m.role != "user") continue;
    if (!first && !m.images.empty()) first = &m;
    last = &m;
  }
  if (!first || !last) throw MalformedResponse("oracle: request has no images");
  const auto it = by_image_.find(first->images.front());
  if (it == by_image_.end()) throw MalformedResponse("oracle: unknown image " + first->images.front());
  const auto& p = options_.prompts;
  const auto& q = last->content;
  if (q == p.binary) return it->second.binary;
  if (q == expand_categories(p.objects, palette_) || q == expand_categories(p.quantify, palette_)) return it->second.counts;
  if (q == p.caption) return it->second.caption;
  if (q == expand_categories(p.localize, palette_)) return it->second.localize;
  throw MalformedResponse("oracle: unknown prompt");
}

} // namespace changekit
