#include "cli.hpp"

#include "changekit/dataset_io.hpp"
#include "changekit/error.hpp"
#include "changekit/eval_harness.hpp"
#include "changekit/gpt_assist.hpp"
#include "changekit/http_endpoint.hpp"
#include "changekit/parallel.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#ifndef CHANGEKIT_DEFAULT_DATA_DIR
#define CHANGEKIT_DEFAULT_DATA_DIR "data"
#endif

namespace changekit::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 18> kValueKeys{
    "corpus_root", "corpus_config",  "output_dir", "seed",         "connectivity", "epsilon",
    "precision",   "min_area",       "endpoint",   "endpoint_config", "constant_reply", "task",
    "jobs",        "split",          "seeds_dir",  "qa_pairs",     "fine_grained_pairs", "image_mode"};
constexpr std::array<std::string_view, 2> kFlagKeys{"skip_gpt", "skip_unchanged"};

std::string flag_name(std::string_view key) {
  std::string f = "--" + std::string(key);
  for (auto& c : f)
    if (c == '_') c = '-';
  return f;
}

std::size_t to_size(const KeyValueConfig& cfg, const std::string& key, std::size_t fallback) {
  const auto v = cfg.get_int(key, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError(key + " must not be negative");
  return static_cast<std::size_t>(v);
}

// Options shared by every subcommand; values land in `given` keyed by config
// key so they can override the config file.
struct CommonOptions {
  std::string config_file;
  bool print_config = false;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "Run configuration file (key = value)");
    app->add_flag("--print-config", print_config, "Print the effective configuration and exit");
    for (auto key : kValueKeys) {
      auto k = std::string(key);
      app->add_option_function<std::string>(flag_name(key), [this, k](const std::string& v) { values[k] = v; },
                                            "Overrides `" + k + "`");
    }
    for (auto key : kFlagKeys) {
      auto k = std::string(key);
      app->add_flag_function(flag_name(key), [this, k](std::int64_t n) { flags[k] = n > 0; }, "Sets `" + k + "`");
    }
  }

  KeyValueConfig merged() const {
    KeyValueConfig cfg = config_file.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_file);
    for (const auto& [k, v] : values) cfg.set(k, v);
    for (const auto& [k, v] : flags) cfg.set(k, v ? "true" : "false");
    return cfg;
  }
};

CorpusManifest load_manifest(const RunConfig& rc) {
  CorpusConfig cc;
  if (!rc.corpus_config.empty()) cc = CorpusConfig::from_config(KeyValueConfig::load(rc.corpus_config));
  auto manifest = scan_corpus(rc.corpus_root, cc);
  if (manifest.samples.empty()) throw IoFailure("no samples found under " + rc.corpus_root.string());
  return manifest;
}

CorpusManifest restrict_split(CorpusManifest manifest, const std::string& split, Split fallback) {
  if (split == "all") return manifest;
  manifest.samples = manifest.split(split == "auto" ? fallback : split_from_string(split));
  return manifest;
}

EndpointConfig load_endpoint_config(const RunConfig& rc) {
  if (rc.endpoint_config.empty()) return {};
  return EndpointConfig::from_config(KeyValueConfig::load(rc.endpoint_config));
}

fs::path seeds_dir(const RunConfig& rc) { return rc.seeds_dir.empty() ? fs::path(CHANGEKIT_DEFAULT_DATA_DIR) / "seeds" : rc.seeds_dir; }

void print_count_table(const CountReport& counts, std::ostream& out) {
  // Reference column: per-row counts published for the full training split.
  struct Row {
    const char* label;
    const char* type;
    std::optional<RecordKind> kind;
    const char* reference;
  };
  const std::array<Row, 7> rows{{
      {"Change captioning", "Rule-based", RecordKind::caption, "34,075"},
      {"Binary change classification", "Rule-based", RecordKind::binary, "6,815"},
      {"Category-specific change quantification", "Rule-based", RecordKind::quantify, "6,815"},
      {"Change localization", "Rule-based", RecordKind::localize, "6,815"},
      {"GPT-assisted instruction", "GPT-assisted", RecordKind::gpt_assisted, "26,600"},
      {"Multi-turn conversation", "Rule-based", RecordKind::multi_turn, "6,815"},
      {"Total", "", std::nullopt, "87,195"},
  }};
  out << std::left << std::setw(42) << "Instruction" << std::setw(14) << "Type" << std::right << std::setw(10)
      << "Number" << std::setw(12) << "Reference" << '\n';
  for (const auto& r : rows) {
    const auto n = r.kind ? counts.count(*r.kind) : counts.total;
    out << std::left << std::setw(42) << r.label << std::setw(14) << r.type << std::right << std::setw(10) << n
        << std::setw(12) << r.reference << '\n';
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoFailure("cannot write " + path.string());
}

int cmd_generate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const auto manifest = restrict_split(load_manifest(rc), rc.split, Split::train);
  if (manifest.samples.empty())
    err << "warning: the " << (rc.split == "auto" ? std::string("train") : rc.split)
        << " split is empty; pass --split all or --split test to use other samples\n";
  const auto gen = rc.generation();

  std::vector<ConversationRecord> gpt;
  const bool use_gpt = !rc.skip_gpt && rc.endpoint != "none";
  if (use_gpt) {
    std::unique_ptr<ChatEndpoint> endpoint;
    const auto ec = load_endpoint_config(rc);
    if (rc.endpoint == "stub") endpoint = std::make_unique<StubGeneratorEndpoint>();
    else if (rc.endpoint == "http") {
      err << "warning: live endpoint " << ec.base_url << " (" << ec.model << ") will be billed for about "
          << 2 * manifest.samples.size() << " requests; responses are cached under "
          << (rc.output_dir / "gpt_cache" / "http").string() << '\n';
      endpoint = std::make_unique<HttpChatEndpoint>(ec);
    } else throw ConfigError("generate supports endpoint none, stub or http, not " + rc.endpoint);

    std::vector<SampleAnalysis> analyses(manifest.samples.size());
    parallel_for(manifest.samples.size(), gen.jobs, [&](std::size_t i) {
      analyses[i] = analyze_change_map(load_change_map(manifest.samples[i], manifest), manifest.palette, gen);
    });
    const auto qa = SeedSet::load(seeds_dir(rc) / "qa_from_captions.json");
    const auto fine = SeedSet::load(seeds_dir(rc) / "fine_grained.json");
    ResponseCache cache(rc.output_dir / "gpt_cache" / rc.endpoint);
    GptGenerationConfig gc;
    gc.qa_pairs = rc.qa_pairs;
    gc.fine_grained_pairs = rc.fine_grained_pairs;
    gc.precision = rc.precision;
    auto result = generate_gpt_records(manifest, analyses, qa, fine, *endpoint, ec, &cache, gc,
                                       [&](const std::string& msg) { err << "gpt: " << msg << '\n'; });
    err << "gpt: " << result.requests_sent << " requests, " << result.cache_hits << " cached, "
        << result.records.size() << " of " << result.raw_pairs << " pairs kept\n";
    gpt = std::move(result.records);
  }

  const auto dataset = assemble_dataset(manifest, gen, gpt);
  fs::create_directories(rc.output_dir);
  const auto path = rc.output_dir / "dataset.jsonl";
  write_records(dataset.records, path);
  write_text(rc.output_dir / "stats.json", dataset.counts.to_json().dump(2) + "\n");
  out << "wrote " << dataset.records.size() << " records for " << manifest.samples.size() << " samples to "
      << path.string() << '\n';
  print_count_table(dataset.counts, out);
  return kOk;
}

int cmd_stats(const fs::path& dataset, std::ostream& out) {
  const auto records = read_records(dataset);
  print_count_table(count_records(records), out);
  return kOk;
}

int cmd_validate(const fs::path& dataset, std::size_t max_shown, std::ostream& out, std::ostream& err) {
  std::ifstream in(dataset, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + dataset.string());
  std::vector<std::string> problems;
  std::set<std::string> ids;
  std::size_t line_no = 0, records = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    ConversationRecord r;
    try {
      r = record_from_json(nlohmann::json::parse(line), line_no);
    } catch (const nlohmann::json::exception& e) {
      problems.push_back("line " + std::to_string(line_no) + ": " + e.what());
      continue;
    } catch (const Error& e) {
      problems.push_back("line " + std::to_string(line_no) + ": " + e.what());
      continue;
    }
    ++records;
    if (!ids.insert(r.record_id).second) problems.push_back(r.record_id + ": duplicate record id");
    for (const auto& v : check_record_strict(r)) problems.push_back(r.record_id + ": " + v);
  }
  for (std::size_t i = 0; i < problems.size() && i < max_shown; ++i) err << problems[i] << '\n';
  if (problems.size() > max_shown) err << "... " << problems.size() - max_shown << " more\n";
  if (!problems.empty()) {
    err << problems.size() << " problem(s) in " << dataset.string() << '\n';
    return kValidationFailure;
  }
  out << records << " records OK\n";
  return kOk;
}

int cmd_evaluate(const RunConfig& rc, bool rescore, std::ostream& out, std::ostream& err) {
  const auto task = eval_task_from_string(rc.task);
  const auto manifest = restrict_split(load_manifest(rc), rc.split, Split::test);
  EvalOptions options;
  options.prompts = EvalPrompts::from_config(rc.prompts);
  options.image_mode = image_mode_from_string(rc.image_mode);
  options.stitch_dir = rc.output_dir / "stitched";
  options.endpoint = load_endpoint_config(rc);
  options.generation = rc.generation();
  options.jobs = rc.jobs;

  const auto transcripts_path = rc.output_dir / ("transcripts_" + rc.task + ".jsonl");
  const auto report_path = rc.output_dir / ("report_" + rc.task + ".json");

  MetricsReport report;
  if (rescore) {
    if (!fs::exists(transcripts_path)) throw IoFailure("no saved transcripts at " + transcripts_path.string());
    report = score_transcripts(task, read_transcripts(transcripts_path), manifest, options);
  } else {
    std::unique_ptr<ChatEndpoint> endpoint;
    if (rc.endpoint == "http") {
      err << "warning: live endpoint " << options.endpoint.base_url << " (" << options.endpoint.model
          << ") will be billed for " << manifest.samples.size() << " session(s)\n";
      endpoint = std::make_unique<HttpChatEndpoint>(options.endpoint);
    } else if (rc.endpoint == "oracle") endpoint = std::make_unique<OracleEndpoint>(manifest, options);
    else if (rc.endpoint == "constant") endpoint = std::make_unique<ConstantEndpoint>(rc.constant_reply);
    else if (rc.endpoint == "none")
      throw EndpointUnavailable("no endpoint configured; set --endpoint or use --rescore with saved transcripts");
    else throw ConfigError("evaluate supports endpoint http, oracle or constant, not " + rc.endpoint);
    if (manifest.samples.empty()) throw EmptyInput("the selected split has no samples");
    report = evaluate_task(*endpoint, manifest, task, options, transcripts_path, std::nullopt);
  }
  write_text(report_path, report.to_json().dump(2) + "\n");
  out << report.to_table();
  if (!rescore && report.samples > 0 && report.failed == report.samples) {
    err << "every session failed; see " << transcripts_path.string() << '\n';
    return kEndpointFailure;
  }
  return kOk;
}

} // namespace

RunConfig RunConfig::from_config(const KeyValueConfig& cfg) {
  RunConfig rc;
  rc.corpus_root = cfg.get_or("corpus_root", rc.corpus_root.string());
  rc.corpus_config = cfg.get_or("corpus_config", rc.corpus_config.string());
  rc.output_dir = cfg.get_or("output_dir", rc.output_dir.string());
  if (auto s = cfg.get("seed")) {
    try {
      std::size_t used = 0;
      rc.seed = std::stoull(*s, &used);
      if (used != s->size()) throw std::invalid_argument(*s);
    } catch (const std::exception&) {
      throw ConfigError("seed must be an unsigned integer, got '" + *s + "'");
    }
  }
  rc.connectivity = cfg.get_or("connectivity", rc.connectivity);
  (void)connectivity_from_string(rc.connectivity);
  rc.epsilon = cfg.get_or("epsilon", rc.epsilon);
  rc.precision = static_cast<int>(cfg.get_int("precision", rc.precision));
  if (rc.precision < 1 || rc.precision > 6) throw ConfigError("precision must be in 1..6");
  rc.min_area = to_size(cfg, "min_area", rc.min_area);
  rc.endpoint = cfg.get_or("endpoint", rc.endpoint);
  rc.endpoint_config = cfg.get_or("endpoint_config", rc.endpoint_config.string());
  rc.constant_reply = cfg.get_or("constant_reply", rc.constant_reply);
  rc.task = cfg.get_or("task", rc.task);
  (void)eval_task_from_string(rc.task);
  rc.jobs = std::max<std::size_t>(1, to_size(cfg, "jobs", rc.jobs));
  rc.split = cfg.get_or("split", rc.split);
  if (rc.split != "auto" && rc.split != "all") (void)split_from_string(rc.split);
  rc.skip_gpt = cfg.get_bool("skip_gpt", rc.skip_gpt);
  rc.skip_unchanged = cfg.get_bool("skip_unchanged", rc.skip_unchanged);
  rc.seeds_dir = cfg.get_or("seeds_dir", rc.seeds_dir.string());
  rc.qa_pairs = to_size(cfg, "qa_pairs", rc.qa_pairs);
  rc.fine_grained_pairs = to_size(cfg, "fine_grained_pairs", rc.fine_grained_pairs);
  rc.image_mode = cfg.get_or("image_mode", rc.image_mode);
  (void)image_mode_from_string(rc.image_mode);
  for (const auto& [k, v] : cfg.entries())
    if (k.rfind("prompt.", 0) == 0) rc.prompts.set(k, v);
  (void)rc.generation();
  return rc;
}

KeyValueConfig RunConfig::to_config() const {
  KeyValueConfig c;
  c.set("corpus_root", corpus_root.string());
  c.set("corpus_config", corpus_config.string());
  c.set("output_dir", output_dir.string());
  c.set("seed", std::to_string(seed));
  c.set("connectivity", connectivity);
  c.set("epsilon", epsilon);
  c.set("precision", std::to_string(precision));
  c.set("min_area", std::to_string(min_area));
  c.set("endpoint", endpoint);
  c.set("endpoint_config", endpoint_config.string());
  c.set("constant_reply", constant_reply);
  c.set("task", task);
  c.set("jobs", std::to_string(jobs));
  c.set("split", split);
  c.set("skip_gpt", skip_gpt ? "true" : "false");
  c.set("skip_unchanged", skip_unchanged ? "true" : "false");
  c.set("seeds_dir", seeds_dir.string());
  c.set("qa_pairs", std::to_string(qa_pairs));
  c.set("fine_grained_pairs", std::to_string(fine_grained_pairs));
  c.set("image_mode", image_mode);
  c.merge(EvalPrompts::from_config(prompts).to_config());
  return c;
}

GenerationConfig RunConfig::generation() const {
  GenerationConfig g;
  g.seed = seed;
  g.connectivity = connectivity_from_string(connectivity);
  if (epsilon != "auto") {
    KeyValueConfig tmp;
    tmp.set("epsilon", epsilon);
    const double e = tmp.get_double("epsilon", -1.0);
    if (e < 0) throw ConfigError("epsilon must be a non-negative number or auto");
    g.epsilon = e;
  }
  g.precision = precision;
  g.min_area = min_area;
  g.skip_unchanged = skip_unchanged;
  g.jobs = jobs;
  return g;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Change-instruction dataset synthesis and evaluation", "changekit"};
  app.require_subcommand(1);

  CommonOptions gen_opts, eval_opts, stats_opts, validate_opts;
  auto* generate = app.add_subcommand("generate", "Build the instruction dataset from a corpus");
  gen_opts.attach(generate);

  auto* evaluate = app.add_subcommand("evaluate", "Run an evaluation task and score it");
  eval_opts.attach(evaluate);
  bool rescore = false;
  evaluate->add_flag("--rescore", rescore, "Score saved transcripts without contacting an endpoint");

  std::string stats_path, validate_path;
  auto* stats = app.add_subcommand("stats", "Count records per instruction kind");
  stats->add_option("dataset", stats_path, "Dataset JSONL file")->required();

  auto* validate = app.add_subcommand("validate", "Check every record of a dataset");
  validate->add_option("dataset", validate_path, "Dataset JSONL file")->required();
  std::size_t max_shown = 20;
  validate->add_option("--max-violations", max_shown, "Violations to print");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kValidationFailure;
  }

  try {
    auto resolve = [&](const CommonOptions& o) { return RunConfig::from_config(o.merged()); };
    if (*generate) {
      const auto rc = resolve(gen_opts);
      if (gen_opts.print_config) return out << rc.to_config().to_text(), kOk;
      return cmd_generate(rc, out, err);
    }
    if (*evaluate) {
      const auto rc = resolve(eval_opts);
      if (eval_opts.print_config) return out << rc.to_config().to_text(), kOk;
      return cmd_evaluate(rc, rescore, out, err);
    }
    if (*stats) return cmd_stats(stats_path, out);
    if (*validate) return cmd_validate(validate_path, max_shown, out, err);
  } catch (const CorpusError& e) {
    err << "invalid corpus: " << e.issues().size() << " issue(s)\n";
    for (const auto& i : e.issues()) err << "  " << i.sample_id << ": " << to_string(i.kind) << ": " << i.detail << '\n';
    return kValidationFailure;
  } catch (const IoFailure& e) {
    err << "I/O failure: " << e.what() << '\n';
    return kIoFailure;
  } catch (const DecodeFailure& e) {
    err << "I/O failure: " << e.what() << '\n';
    return kIoFailure;
  } catch (const EndpointError& e) {
    err << "endpoint failure: " << e.what() << '\n';
    return kEndpointFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  }
  return kValidationFailure;
}

} // namespace changekit::cli
