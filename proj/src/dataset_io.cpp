#include "changekit/dataset_io.hpp"

#include "changekit/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace changekit {

namespace fs = std::filesystem;

std::string to_string(CorpusIssueKind kind) {
  switch (kind) {
  case CorpusIssueKind::MissingFile: return "MissingFile";
  case CorpusIssueKind::CaptionCountMismatch: return "CaptionCountMismatch";
  case CorpusIssueKind::DuplicateSampleId: return "DuplicateSampleId";
  case CorpusIssueKind::DimensionMismatch: return "DimensionMismatch";
  case CorpusIssueKind::BadIndex: return "BadIndex";
  }
  return "?";
}

namespace {

std::string describe(const std::vector<CorpusIssue>& issues) {
  std::string msg = "corpus validation failed with " + std::to_string(issues.size()) + " issue(s):";
  for (const auto& i : issues) msg += "\n  " + to_string(i.kind) + " [" + i.sample_id + "]: " + i.detail;
  return msg;
}

} // namespace

CorpusError::CorpusError(std::vector<CorpusIssue> issues) : Error(describe(issues)), issues_(std::move(issues)) {}

MalformedLine::MalformedLine(std::size_t line, const std::string& reason)
    : Error("malformed line " + std::to_string(line) + ": " + reason), line_(line) {}

SchemaViolation::SchemaViolation(std::size_t line, const std::string& reason)
    : Error(line ? "schema violation at line " + std::to_string(line) + ": " + reason : "schema violation: " + reason),
      line_(line) {}

UnknownPixelValue::UnknownPixelValue(std::uint32_t rgb, std::size_t x, std::size_t y)
    : Error([&] {
        char buf[96];
        std::snprintf(buf, sizeof buf, "unknown pixel value #%06X at (%zu, %zu)", rgb, x, y);
        return std::string(buf);
      }()),
      rgb_(rgb), x_(x), y_(y) {}

ParseFailure::ParseFailure(std::size_t position, const std::string& reason)
    : Error("polygon parse failure at position " + std::to_string(position) + ": " + reason), position_(position) {}

std::string_view to_string(Split s) {
  switch (s) {
  case Split::train: return "train";
  case Split::val: return "val";
  case Split::test: return "test";
  }
  return "?";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val" || s == "valid" || s == "validation") return Split::val;
  if (s == "test") return Split::test;
  throw ConfigError("unknown split '" + std::string(s) + "'");
}

// --- corpus config -------------------------------------------------------------

namespace {

std::uint32_t parse_label_value(const std::string& text) {
  if (!text.empty() && text.front() == '#') {
    if (text.size() != 7) throw ConfigError("label color must be #RRGGBB: " + text);
    std::uint32_t rgb = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), rgb, 16);
    if (ec != std::errc{} || ptr != text.data() + text.size()) throw ConfigError("bad label color " + text);
    return rgb;
  }
  unsigned v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v > 255)
    throw ConfigError("label value must be a gray level 0-255 or #RRGGBB: " + text);
  return (v << 16) | (v << 8) | v;
}

std::string format_label_value(std::uint32_t rgb) {
  const auto r = (rgb >> 16) & 0xFF, g = (rgb >> 8) & 0xFF, b = rgb & 0xFF;
  if (r == g && g == b) return std::to_string(r);
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%06X", rgb);
  return buf;
}

} // namespace

CorpusConfig CorpusConfig::from_config(const KeyValueConfig& cfg) {
  CorpusConfig c;
  c.caption_index = cfg.get_or("caption_index", c.caption_index);
  c.image_a_dir = cfg.get_or("image_a_dir", c.image_a_dir);
  c.image_b_dir = cfg.get_or("image_b_dir", c.image_b_dir);
  c.change_map_dir = cfg.get_or("change_map_dir", c.change_map_dir);
  const auto w = cfg.get_int("image_width", static_cast<long long>(c.image_size.width));
  const auto h = cfg.get_int("image_height", static_cast<long long>(c.image_size.height));
  if (w <= 0 || h <= 0) throw ConfigError("image dimensions must be positive");
  c.image_size = {static_cast<std::size_t>(w), static_cast<std::size_t>(h)};

  CategoryPalette palette;
  bool any_label = false;
  for (const auto& [key, value] : cfg.entries()) {
    if (key.rfind("label.", 0) != 0) continue;
    any_label = true;
    unsigned id = 0;
    const auto id_text = key.substr(6);
    const auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (ec != std::errc{} || ptr != id_text.data() + id_text.size() || id > 0xFFFF)
      throw ConfigError("bad label key '" + key + "'");
    std::istringstream in(value);
    std::string names, color;
    if (!(in >> names >> color)) throw ConfigError("label entry must be '<name>[/<plural>] <value>': " + value);
    Category cat;
    cat.id = static_cast<CategoryId>(id);
    const auto slash = names.find('/');
    cat.name = names.substr(0, slash);
    if (slash != std::string::npos) cat.plural = names.substr(slash + 1);
    cat.rgb = parse_label_value(color);
    palette.add(std::move(cat));
  }
  if (any_label) {
    if (!palette.valid()) throw ConfigError("palette needs background (label.0) plus at least one change category");
    c.palette = std::move(palette);
  }
  return c;
}

KeyValueConfig CorpusConfig::to_config() const {
  KeyValueConfig cfg;
  cfg.set("caption_index", caption_index);
  cfg.set("image_a_dir", image_a_dir);
  cfg.set("image_b_dir", image_b_dir);
  cfg.set("change_map_dir", change_map_dir);
  cfg.set("image_width", std::to_string(image_size.width));
  cfg.set("image_height", std::to_string(image_size.height));
  for (const auto& cat : palette.categories())
    cfg.set("label." + std::to_string(cat.id), cat.name + "/" + cat.plural + " " + format_label_value(cat.rgb));
  return cfg;
}

std::vector<SampleBundle> CorpusManifest::split(Split s) const {
  std::vector<SampleBundle> out;
  std::copy_if(samples.begin(), samples.end(), std::back_inserter(out),
               [s](const SampleBundle& b) { return b.split == s; });
  return out;
}

// --- scanning ------------------------------------------------------------------

namespace {

std::string expand_split(std::string pattern, std::string_view split) {
  const std::string token = "{split}";
  for (auto pos = pattern.find(token); pos != std::string::npos; pos = pattern.find(token, pos + split.size()))
    pattern.replace(pos, token.size(), split);
  return pattern;
}

std::string trim_copy(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

} // namespace

CorpusManifest scan_corpus(const fs::path& root, const CorpusConfig& config) {
  if (!fs::is_directory(root)) throw IoFailure("corpus root " + root.string() + " is not a directory");

  CorpusManifest manifest;
  manifest.palette = config.palette;
  manifest.image_size = config.image_size;

  const auto index_path = root / config.caption_index;
  if (!fs::exists(index_path)) return manifest;

  nlohmann::json index;
  try {
    std::ifstream in(index_path);
    index = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError({{CorpusIssueKind::BadIndex, "", index_path.string() + ": " + e.what()}});
  }
  if (!index.is_object() || !index.contains("images") || !index["images"].is_array())
    throw CorpusError({{CorpusIssueKind::BadIndex, "", "caption index must hold an 'images' array"}});

  std::vector<CorpusIssue> issues;
  std::set<std::string> seen;
  for (const auto& entry : index["images"]) {
    if (!entry.is_object() || !entry.contains("filename") || !entry["filename"].is_string()) {
      issues.push_back({CorpusIssueKind::BadIndex, "", "index entry without a 'filename' string"});
      continue;
    }
    const std::string filename = entry["filename"].get<std::string>();
    SampleBundle s;
    s.sample_id = fs::path(filename).stem().string();

    std::string split_name = "train";
    if (entry.contains("split") && entry["split"].is_string()) split_name = entry["split"].get<std::string>();
    else if (entry.contains("filepath") && entry["filepath"].is_string())
      split_name = entry["filepath"].get<std::string>();
    try {
      s.split = split_from_string(split_name);
    } catch (const ConfigError& e) {
      issues.push_back({CorpusIssueKind::BadIndex, s.sample_id, e.what()});
      continue;
    }

    if (!seen.insert(s.sample_id).second) {
      issues.push_back({CorpusIssueKind::DuplicateSampleId, s.sample_id, "sample id appears more than once"});
      continue;
    }

    std::vector<std::string> captions;
    if (entry.contains("sentences") && entry["sentences"].is_array()) {
      for (const auto& sent : entry["sentences"]) {
        if (sent.is_string()) captions.push_back(trim_copy(sent.get<std::string>()));
        else if (sent.is_object() && sent.contains("raw") && sent["raw"].is_string())
          captions.push_back(trim_copy(sent["raw"].get<std::string>()));
      }
    }
    if (captions.size() != 5) {
      issues.push_back({CorpusIssueKind::CaptionCountMismatch, s.sample_id,
                        "expected 5 captions, found " + std::to_string(captions.size())});
      continue;
    }
    std::copy(captions.begin(), captions.end(), s.captions.begin());

    const auto split = std::string(to_string(s.split));
    s.image_a = root / expand_split(config.image_a_dir, split) / filename;
    s.image_b = root / expand_split(config.image_b_dir, split) / filename;
    s.change_map = root / expand_split(config.change_map_dir, split) / filename;
    bool missing = false;
    for (const auto* p : {&s.image_a, &s.image_b, &s.change_map}) {
      if (!fs::is_regular_file(*p)) {
        issues.push_back({CorpusIssueKind::MissingFile, s.sample_id, p->string() + " does not exist"});
        missing = true;
      }
    }
    if (missing) continue;

    try {
      const auto size = read_png_size(s.change_map);
      if (!(size == config.image_size)) {
        issues.push_back({CorpusIssueKind::DimensionMismatch, s.sample_id,
                          "change map is " + std::to_string(size.width) + "x" + std::to_string(size.height)});
        continue;
      }
    } catch (const Error& e) {
      issues.push_back({CorpusIssueKind::DimensionMismatch, s.sample_id, e.what()});
      continue;
    }
    manifest.samples.push_back(std::move(s));
  }

  if (!issues.empty()) throw CorpusError(std::move(issues));
  std::sort(manifest.samples.begin(), manifest.samples.end(),
            [](const SampleBundle& a, const SampleBundle& b) { return a.sample_id < b.sample_id; });
  return manifest;
}

LabelGrid load_change_map(const SampleBundle& sample, const CorpusManifest& manifest) {
  auto grid = decode_change_map(read_file_bytes(sample.change_map), manifest.palette);
  if (grid.width() != manifest.image_size.width || grid.height() != manifest.image_size.height)
    throw DecodeFailure("change map of " + sample.sample_id + " does not match the corpus image size");
  return grid;
}

// --- record files --------------------------------------------------------------

std::size_t write_records(std::span<const ConversationRecord> records, const fs::path& out) {
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw IoFailure("cannot open " + out.string() + " for writing");
  std::size_t n = 0;
  for (const auto& r : records) {
    std::string line;
    try {
      line = record_to_line(r);
    } catch (const nlohmann::json::exception& e) {
      throw IoFailure("record " + r.record_id + " cannot be encoded: " + e.what());
    }
    file << line << '\n';
    ++n;
  }
  file.flush();
  if (!file) throw IoFailure("write failed for " + out.string());
  return n;
}

std::vector<ConversationRecord> read_records(const fs::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoFailure("cannot open " + path.string());
  std::vector<ConversationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedLine(line_no, e.what());
    }
    out.push_back(record_from_json(j, line_no));
  }
  return out;
}

} // namespace changekit
