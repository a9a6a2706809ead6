#pragma once

// Instruction records and their JSON-lines representation.
//
// One record per line, keys in this order:
//   record_id, sample_id, kind, provenance, image_a, image_b,
//   conversations: [{"from": "human"|"assistant", "value": ...}, ...]

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace changekit {

inline constexpr std::string_view kImageA = "<image_a>";
inline constexpr std::string_view kImageB = "<image_b>";
inline constexpr std::string_view kStop = "<STOP>";

enum class Speaker { human, assistant };
enum class RecordKind { caption, binary, quantify, localize, gpt_assisted, multi_turn };
enum class Provenance { rule_based, gpt_assisted };

inline constexpr std::array<RecordKind, 6> kAllKinds{RecordKind::caption,  RecordKind::binary,
                                                     RecordKind::quantify, RecordKind::localize,
                                                     RecordKind::gpt_assisted, RecordKind::multi_turn};

std::string_view to_string(Speaker s);
std::string_view to_string(RecordKind k);
std::string_view to_string(Provenance p);
std::optional<Speaker> speaker_from_string(std::string_view s);
std::optional<RecordKind> kind_from_string(std::string_view s);
std::optional<Provenance> provenance_from_string(std::string_view s);

struct Turn {
  Speaker speaker = Speaker::human;
  std::string text;
  bool operator==(const Turn&) const = default;
};

struct ConversationRecord {
  std::string record_id;
  std::string sample_id;
  RecordKind kind = RecordKind::caption;
  Provenance provenance = Provenance::rule_based;
  std::string image_a;
  std::string image_b;
  std::vector<Turn> turns;

  bool operator==(const ConversationRecord&) const = default;
};

/// First human turn text: both placeholders, then the question.
std::string with_image_placeholders(std::string_view question);

/// Structural invariants: alternation starting with human and ending with
/// assistant, non-empty turns, placeholders once each (t1 before t2) in the
/// first human turn only, per-kind human-turn arity, provenance matching kind.
/// Returns one message per violation; empty means valid.
std::vector<std::string> check_record(const ConversationRecord& record);

/// check_record plus re-parsing of every embedded polygon substring.
std::vector<std::string> check_record_strict(const ConversationRecord& record);

nlohmann::ordered_json record_to_json(const ConversationRecord& record);
std::string record_to_line(const ConversationRecord& record);

/// Throws SchemaViolation (line number 0 when unknown).
ConversationRecord record_from_json(const nlohmann::json& j, std::size_t line = 0);

/// Flat training text: `Human: ... <STOP> Assistant: ... <STOP>` per turn.
std::string render_training_text(const ConversationRecord& record);

} // namespace changekit
