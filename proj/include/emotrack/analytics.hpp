#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>
#include <json.hpp>

#include "emotrack/emotion.hpp"
#include "emotrack/record.hpp"

namespace emotrack {

using Rational = boost::rational<std::int64_t>;

// Per-emotion row of a summary. count == 0 implies every optional is empty.
struct EmotionStats {
  EmotionKind emotion = EmotionKind::kAnger;
  std::int64_t count = 0;
  std::optional<Rational> mean;
  std::optional<int> min;
  std::optional<int> max;
  std::optional<int> latest;

  friend bool operator==(const EmotionStats&, const EmotionStats&) = default;
};

// Current-state view of a card: statistics over each member's latest value per
// emotion. Contains no member identifiers.
struct CardSummary {
  std::string card_id;
  std::vector<EmotionStats> rows;  // all eight emotions, canonical order
  std::int64_t respondent_count = 0;

  const EmotionStats& row(EmotionKind kind) const { return rows[index_of(kind)]; }

  friend bool operator==(const CardSummary&, const CardSummary&) = default;
};

// Records not belonging to card_id are ignored.
CardSummary card_summary(const std::string& card_id, std::span<const ReactionRecord> records);

// Board-wide current state: latest value per (card, member, emotion) over the
// given records. card_id of the result is the board id.
CardSummary board_summary(const std::string& board_id, std::span<const ReactionRecord> records);

// Mean of present positive-valence means minus mean of present negative-valence
// means (an empty side counts as 0). Empty when no row has count >= 1.
std::optional<Rational> aggregate_sentiment(const CardSummary& summary, const EmotionSchema& schema);

enum class Granularity { kHour, kDay, kWeek };

std::optional<Granularity> parse_granularity(std::string_view text);
std::string_view to_string(Granularity g) noexcept;
std::int64_t bucket_length_ms(Granularity g) noexcept;
// Hour and day buckets start on epoch multiples; week buckets start Monday 00:00 UTC.
Timestamp bucket_start(Timestamp t, Granularity g) noexcept;

struct BucketCell {
  EmotionKind emotion = EmotionKind::kAnger;
  std::int64_t count = 0;
  std::optional<Rational> mean;

  friend bool operator==(const BucketCell&, const BucketCell&) = default;
};

struct Bucket {
  Timestamp start;
  std::vector<BucketCell> cells;  // one per series emotion, in series order

  const BucketCell* cell(EmotionKind kind) const;

  friend bool operator==(const Bucket&, const Bucket&) = default;
};

// Board scope when card_id is empty.
struct Scope {
  std::string board_id;
  std::optional<std::string> card_id;

  bool contains(const ReactionRecord& r) const {
    return r.board_id == board_id && (!card_id || r.card_id == *card_id);
  }
};

struct TimeSeries {
  Granularity granularity = Granularity::kDay;
  Scope scope;
  ReactionFilter filter;
  std::vector<EmotionKind> emotions;
  std::vector<Bucket> buckets;  // contiguous, ascending; empty if nothing in scope
};

// Full-history series: every record in scope passing the filter contributes to
// the bucket containing its captured_at.
TimeSeries time_series(const Scope& scope, Granularity granularity, const ReactionFilter& filter,
                       std::span<const ReactionRecord> records);

// One member across every card on the board.
TimeSeries member_trend(const std::string& board_id, const std::string& member_id,
                        Granularity granularity, std::span<const ReactionRecord> records);

struct Peak {
  EmotionKind emotion = EmotionKind::kAnger;
  Timestamp bucket_start;
  Rational mean;

  friend bool operator==(const Peak&, const Peak&) = default;
};

// A bucket is a peak when its mean is present and strictly greater than each
// existing neighbour's mean, an empty neighbour counting as 0.
std::vector<Peak> detect_peaks(const TimeSeries& series, EmotionKind emotion);

struct StageStats {
  Stage stage;
  std::int64_t total = 0;
  std::vector<BucketCell> cells;  // all eight emotions

  friend bool operator==(const StageStats&, const StageStats&) = default;
};

struct StageBreakdown {
  std::vector<StageStats> stages;  // ordered by (stage id, stage name)

  friend bool operator==(const StageBreakdown&, const StageBreakdown&) = default;
};

// Groups raw records in scope by their stored stage snapshot.
StageBreakdown stage_breakdown(const Scope& scope, std::span<const ReactionRecord> records);

double to_double(const Rational& r) noexcept;

nlohmann::json to_json(const CardSummary& s);
nlohmann::json to_json(const TimeSeries& s);
nlohmann::json to_json(const Peak& p);
nlohmann::json to_json(const StageBreakdown& b);
nlohmann::json rational_json(const std::optional<Rational>& r);

}  // namespace emotrack
