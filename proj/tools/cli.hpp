#pragma once

// Command-line front end: generate | stats | evaluate | validate.

#include "changekit/config.hpp"
#include "changekit/instructions.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace changekit::cli {

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kIoFailure = 2, kEndpointFailure = 3 };

/// Every knob of a run. Each field has a config key of the same name and a
/// flag with dashes (`min_area` <-> `--min-area`).
struct RunConfig {
  std::filesystem::path corpus_root = ".";
  std::filesystem::path corpus_config;   // optional corpus layout file
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = kDefaultSeed;
  std::string connectivity = "eight";
  std::string epsilon = "auto";          // pixels, or "auto" for 2% of the larger side
  int precision = kDefaultPrecision;
  std::size_t min_area = 0;
  std::string endpoint = "none";         // none | http | stub | oracle | constant
  std::filesystem::path endpoint_config; // optional endpoint settings file
  std::string constant_reply;
  std::string task = "caption_cot";
  std::size_t jobs = 1;
  std::string split = "auto";            // auto = train for generate, test for evaluate; or train|val|test|all
  bool skip_gpt = false;
  bool skip_unchanged = false;
  std::filesystem::path seeds_dir;       // default: the shipped seed files
  std::size_t qa_pairs = 2;
  std::size_t fine_grained_pairs = 2;
  std::string image_mode = "attachments";
  KeyValueConfig prompts;                // prompt.* overrides for evaluation

  static RunConfig from_config(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;
  GenerationConfig generation() const;
};

/// Runs one command line (argv[0] excluded). Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace changekit::cli
