#include "changekit/records.hpp"

#include "changekit/error.hpp"
#include "changekit/geometry.hpp"

#include <algorithm>

namespace changekit {

std::string_view to_string(Speaker s) { return s == Speaker::human ? "human" : "assistant"; }

std::string_view to_string(RecordKind k) {
  switch (k) {
  case RecordKind::caption: return "caption";
  case RecordKind::binary: return "binary";
  case RecordKind::quantify: return "quantify";
  case RecordKind::localize: return "localize";
  case RecordKind::gpt_assisted: return "gpt_assisted";
  case RecordKind::multi_turn: return "multi_turn";
  }
  return "?";
}

std::string_view to_string(Provenance p) { return p == Provenance::rule_based ? "rule_based" : "gpt_assisted"; }

std::optional<Speaker> speaker_from_string(std::string_view s) {
  if (s == "human") return Speaker::human;
  if (s == "assistant") return Speaker::assistant;
  return std::nullopt;
}

std::optional<RecordKind> kind_from_string(std::string_view s) {
  for (auto k : kAllKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::optional<Provenance> provenance_from_string(std::string_view s) {
  if (s == "rule_based") return Provenance::rule_based;
  if (s == "gpt_assisted") return Provenance::gpt_assisted;
  return std::nullopt;
}

std::string with_image_placeholders(std::string_view question) {
  std::string out;
  out.append(kImageA).append(" ").append(kImageB).append(" ").append(question);
  return out;
}

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) ++n;
  return n;
}

} // namespace

std::vector<std::string> check_record(const ConversationRecord& r) {
  std::vector<std::string> problems;
  auto problem = [&](std::string msg) { problems.push_back(std::move(msg)); };

  if (r.record_id.empty()) problem("empty record_id");
  if (r.sample_id.empty()) problem("empty sample_id");
  if (r.turns.size() < 2) problem("a record needs at least one human and one assistant turn");

  std::size_t human_turns = 0;
  for (std::size_t i = 0; i < r.turns.size(); ++i) {
    const auto& t = r.turns[i];
    const auto expected = i % 2 == 0 ? Speaker::human : Speaker::assistant;
    if (t.speaker != expected)
      problem("turn " + std::to_string(i) + " should be " + std::string(to_string(expected)) + " (turns must alternate)");
    if (t.text.empty()) problem("turn " + std::to_string(i) + " has empty text");
    if (t.speaker == Speaker::human) ++human_turns;

    const auto na = count_occurrences(t.text, kImageA);
    const auto nb = count_occurrences(t.text, kImageB);
    if (i == 0) {
      if (na != 1 || nb != 1) problem("first human turn must contain each image placeholder exactly once");
      else if (t.text.find(kImageA) > t.text.find(kImageB)) problem("image placeholders out of order");
    } else if (na || nb) {
      problem("turn " + std::to_string(i) + " contains an image placeholder outside the first human turn");
    }
  }
  if (!r.turns.empty() && r.turns.back().speaker != Speaker::assistant) problem("last turn must be assistant");

  if (r.kind == RecordKind::multi_turn) {
    if (human_turns < 3) problem("multi_turn record needs at least 3 human turns");
  } else if (human_turns != 1) {
    problem(std::string(to_string(r.kind)) + " record needs exactly 1 human turn");
  }
  const bool gpt_kind = r.kind == RecordKind::gpt_assisted;
  const bool gpt_prov = r.provenance == Provenance::gpt_assisted;
  if (gpt_kind != gpt_prov) problem("provenance does not match kind");
  return problems;
}

std::vector<std::string> check_record_strict(const ConversationRecord& r) {
  auto problems = check_record(r);
  for (std::size_t i = 0; i < r.turns.size(); ++i) {
    for (const auto& poly : extract_polygon_texts(r.turns[i].text)) {
      try {
        parse_polygon(poly);
      } catch (const Error& e) {
        problems.push_back("turn " + std::to_string(i) + " has an unparseable polygon '" + poly + "': " + e.what());
      }
    }
  }
  return problems;
}

nlohmann::ordered_json record_to_json(const ConversationRecord& r) {
  nlohmann::ordered_json j;
  j["record_id"] = r.record_id;
  j["sample_id"] = r.sample_id;
  j["kind"] = to_string(r.kind);
  j["provenance"] = to_string(r.provenance);
  j["image_a"] = r.image_a;
  j["image_b"] = r.image_b;
  auto& conv = j["conversations"] = nlohmann::ordered_json::array();
  for (const auto& t : r.turns) {
    nlohmann::ordered_json turn;
    turn["from"] = to_string(t.speaker);
    turn["value"] = t.text;
    conv.push_back(std::move(turn));
  }
  return j;
}

std::string record_to_line(const ConversationRecord& r) { return record_to_json(r).dump(); }

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaViolation(line, std::string("missing required field '") + key + "'");
  return *it;
}

std::string require_string(const nlohmann::json& j, const char* key, std::size_t line) {
  const auto& v = require(j, key, line);
  if (!v.is_string()) throw SchemaViolation(line, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

} // namespace

ConversationRecord record_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaViolation(line, "record must be a JSON object");
  ConversationRecord r;
  r.record_id = require_string(j, "record_id", line);
  r.sample_id = require_string(j, "sample_id", line);

  const auto kind = require_string(j, "kind", line);
  const auto k = kind_from_string(kind);
  if (!k) throw SchemaViolation(line, "unknown kind '" + kind + "'");
  r.kind = *k;

  const auto prov = require_string(j, "provenance", line);
  const auto p = provenance_from_string(prov);
  if (!p) throw SchemaViolation(line, "unknown provenance '" + prov + "'");
  r.provenance = *p;

  r.image_a = require_string(j, "image_a", line);
  r.image_b = require_string(j, "image_b", line);

  const auto& conv = require(j, "conversations", line);
  if (!conv.is_array()) throw SchemaViolation(line, "field 'conversations' must be an array");
  for (const auto& t : conv) {
    if (!t.is_object()) throw SchemaViolation(line, "conversation turn must be an object");
    const auto from = require_string(t, "from", line);
    const auto speaker = speaker_from_string(from);
    if (!speaker) throw SchemaViolation(line, "unknown speaker '" + from + "'");
    r.turns.push_back({*speaker, require_string(t, "value", line)});
  }
  return r;
}

std::string render_training_text(const ConversationRecord& r) {
  std::string out;
  for (const auto& t : r.turns) {
    if (!out.empty()) out += ' ';
    out += t.speaker == Speaker::human ? "Human: " : "Assistant: ";
    out += t.text;
    out += ' ';
    out += kStop;
  }
  return out;
}

} // namespace changekit
