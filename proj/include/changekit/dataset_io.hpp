#pragma once

// Corpus discovery (LEVIR-MCI layout by default) and record persistence.

#include "changekit/config.hpp"
#include "changekit/png_io.hpp"
#include "changekit/raster.hpp"
#include "changekit/records.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace changekit {

enum class Split { train, val, test };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

struct SampleBundle {
  std::string sample_id;
  std::filesystem::path image_a;    // time t1
  std::filesystem::path image_b;    // time t2
  std::filesystem::path change_map;
  std::array<std::string, 5> captions;
  Split split = Split::train;

  bool operator==(const SampleBundle&) const = default;
};

/// Where the pieces of a corpus live, relative to its root.
///
/// Directory templates may contain `{split}`, replaced by the sample's split
/// name. The caption index is a JSON file in the LEVIR-CC layout:
/// `{"images": [{"filename", "split", "sentences": [{"raw": ...}, ...]}]}`.
struct CorpusConfig {
  std::string caption_index = "LevirCCcaptions.json";
  std::string image_a_dir = "images/{split}/A";
  std::string image_b_dir = "images/{split}/B";
  std::string change_map_dir = "images/{split}/label";
  ImageSize image_size{256, 256};
  CategoryPalette palette = CategoryPalette::levir_mci();

  /// Keys: caption_index, image_a_dir, image_b_dir, change_map_dir,
  /// image_width, image_height, and `label.<id> = <name>[/<plural>] <value>`
  /// where value is a gray level (`2`) or a color (`#FF0000`). Any label key
  /// replaces the whole default palette.
  static CorpusConfig from_config(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;

  bool operator==(const CorpusConfig&) const = default;
};

struct CorpusManifest {
  std::vector<SampleBundle> samples; // sorted by sample_id
  CategoryPalette palette;
  ImageSize image_size;

  /// Samples of one split, in manifest order.
  std::vector<SampleBundle> split(Split s) const;

  bool operator==(const CorpusManifest&) const = default;
};

/// Validates every caption-index entry and returns the sorted manifest.
/// All failing samples are collected into one CorpusError. A root without a
/// caption index yields an empty manifest.
CorpusManifest scan_corpus(const std::filesystem::path& root, const CorpusConfig& config);

/// Loads and decodes the sample's change map through the manifest palette.
LabelGrid load_change_map(const SampleBundle& sample, const CorpusManifest& manifest);

/// One JSON object per line, input order. Throws IoFailure.
std::size_t write_records(std::span<const ConversationRecord> records, const std::filesystem::path& out);

/// Throws IoFailure, MalformedLine (1-based line) or SchemaViolation.
std::vector<ConversationRecord> read_records(const std::filesystem::path& path);

} // namespace changekit
