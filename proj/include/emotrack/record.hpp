#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emotrack/emotion.hpp"
#include "emotrack/time.hpp"

namespace emotrack {

// Board list a card occupies. The name is denormalized into every record so
// renaming a list never rewrites history.
struct Stage {
  std::string id;
  std::string name;

  friend bool operator==(const Stage&, const Stage&) = default;
  friend auto operator<=>(const Stage&, const Stage&) = default;
};

struct ReactionRecord {
  std::string record_id;
  std::string board_id;
  std::string card_id;
  std::string member_id;
  EmotionKind emotion = EmotionKind::kAnger;
  Intensity intensity{Intensity::kMin};
  Timestamp captured_at;
  Stage stage;
  int schema_version = kCurrentSchemaVersion;

  friend bool operator==(const ReactionRecord&, const ReactionRecord&) = default;
};

// Canonical record order: (captured_at, record_id) ascending.
bool record_less(const ReactionRecord& a, const ReactionRecord& b);

// One panel save. Ratings are raw integers; validation happens on append.
struct ReactionBatch {
  std::string board_id;
  std::string card_id;
  std::string member_id;
  std::map<EmotionKind, std::int64_t> ratings;
};

struct ReactionFilter {
  std::optional<std::string> board_id;
  std::optional<std::string> card_id;
  std::optional<std::string> member_id;
  std::optional<std::set<EmotionKind>> emotions;
  std::optional<Timestamp> from;  // inclusive
  std::optional<Timestamp> to;    // exclusive
  std::optional<std::set<std::string>> stage_ids;

  // Throws Error(kInvalidArgument) when from >= to.
  void validate() const;
  bool matches(const ReactionRecord& r) const;
};

using MemberEmotionKey = std::pair<std::string, EmotionKind>;
using LatestMap = std::map<MemberEmotionKey, ReactionRecord>;

// For each (member, emotion) the record with maximal (captured_at, record_id).
LatestMap latest_per_member(std::span<const ReactionRecord> records);

// Export field order; also the CSV header.
inline constexpr std::string_view kExportHeader =
    "record_id,board_id,card_id,member_id,emotion,intensity,captured_at,stage_id,stage_name,"
    "schema_version";

nlohmann::ordered_json to_json(const ReactionRecord& r);

// Inverse of to_json. Throws Error(kMalformed).
ReactionRecord record_from_json(const nlohmann::json& j);

enum class ExportFormat { kCsv, kJsonl };

std::optional<ExportFormat> parse_export_format(std::string_view text);

// Writes records in the given order. CSV fields are quoted per RFC 4180 when
// they contain a comma, quote, CR or LF. Lines end in "\n".
void write_export(std::span<const ReactionRecord> records, ExportFormat format, std::ostream& out);

}  // namespace emotrack
