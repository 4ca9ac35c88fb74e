#include "emotrack/analytics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace emotrack {
namespace {

// Monday 1970-01-05 is four days after the epoch.
constexpr std::int64_t kWeekOffsetMs = 4 * kMsPerDay;

struct Accumulator {
  std::int64_t count = 0;
  std::int64_t sum = 0;
  int min = Intensity::kMax;
  int max = Intensity::kMin;

  void add(int v) {
    ++count;
    sum += v;
    min = std::min(min, v);
    max = std::max(max, v);
  }
  std::optional<Rational> mean() const {
    if (count == 0) return std::nullopt;
    return Rational(sum, count);
  }
};

// Rows from the "current" records; latest from the full history.
CardSummary summarize(const std::string& id, const std::vector<const ReactionRecord*>& current,
                      std::span<const ReactionRecord> history,
                      const std::set<std::string>& members) {
  std::array<Accumulator, kEmotionCount> acc{};
  for (const auto* r : current) acc[index_of(r->emotion)].add(r->intensity.value());

  std::array<const ReactionRecord*, kEmotionCount> newest{};
  for (const auto& r : history) {
    auto& slot = newest[index_of(r.emotion)];
    if (!slot || record_less(*slot, r)) slot = &r;
  }

  CardSummary s;
  s.card_id = id;
  s.respondent_count = static_cast<std::int64_t>(members.size());
  for (EmotionKind k : kAllEmotions) {
    const auto& a = acc[index_of(k)];
    EmotionStats row;
    row.emotion = k;
    row.count = a.count;
    if (a.count > 0) {
      row.mean = a.mean();
      row.min = a.min;
      row.max = a.max;
      if (const auto* n = newest[index_of(k)]) row.latest = n->intensity.value();
    }
    s.rows.push_back(row);
  }
  return s;
}

}  // namespace

CardSummary card_summary(const std::string& card_id, std::span<const ReactionRecord> records) {
  std::vector<ReactionRecord> own;
  std::set<std::string> members;
  for (const auto& r : records) {
    if (r.card_id != card_id) continue;
    own.push_back(r);
    members.insert(r.member_id);
  }
  const LatestMap latest = latest_per_member(own);
  std::vector<const ReactionRecord*> current;
  current.reserve(latest.size());
  for (const auto& [key, r] : latest) current.push_back(&r);
  return summarize(card_id, current, own, members);
}

CardSummary board_summary(const std::string& board_id, std::span<const ReactionRecord> records) {
  std::map<std::tuple<std::string, std::string, EmotionKind>, const ReactionRecord*> latest;
  std::vector<ReactionRecord> own;
  std::set<std::string> members;
  for (const auto& r : records) {
    if (r.board_id != board_id) continue;
    own.push_back(r);
    members.insert(r.member_id);
  }
  for (const auto& r : own) {
    auto& slot = latest[{r.card_id, r.member_id, r.emotion}];
    if (!slot || record_less(*slot, r)) slot = &r;
  }
  std::vector<const ReactionRecord*> current;
  for (const auto& [key, r] : latest) current.push_back(r);
  return summarize(board_id, current, own, members);
}

std::optional<Rational> aggregate_sentiment(const CardSummary& summary, const EmotionSchema& schema) {
  Rational pos_sum = 0, neg_sum = 0;
  std::int64_t pos_n = 0, neg_n = 0;
  for (const auto& row : summary.rows) {
    if (row.count < 1 || !row.mean) continue;
    if (schema.descriptor(row.emotion).valence == Valence::kPositive) {
      pos_sum += *row.mean;
      ++pos_n;
    } else {
      neg_sum += *row.mean;
      ++neg_n;
    }
  }
  if (pos_n + neg_n == 0) return std::nullopt;
  const Rational pos = pos_n ? pos_sum / pos_n : Rational(0);
  const Rational neg = neg_n ? neg_sum / neg_n : Rational(0);
  return pos - neg;
}

std::optional<Granularity> parse_granularity(std::string_view text) {
  if (text == "hour") return Granularity::kHour;
  if (text == "day") return Granularity::kDay;
  if (text == "week") return Granularity::kWeek;
  return std::nullopt;
}

std::string_view to_string(Granularity g) noexcept {
  switch (g) {
    case Granularity::kHour: return "hour";
    case Granularity::kDay: return "day";
    case Granularity::kWeek: return "week";
  }
  return "day";
}

std::int64_t bucket_length_ms(Granularity g) noexcept {
  switch (g) {
    case Granularity::kHour: return kMsPerHour;
    case Granularity::kDay: return kMsPerDay;
    case Granularity::kWeek: return kMsPerWeek;
  }
  return kMsPerDay;
}

Timestamp bucket_start(Timestamp t, Granularity g) noexcept {
  const std::int64_t len = bucket_length_ms(g);
  const std::int64_t offset = g == Granularity::kWeek ? kWeekOffsetMs : 0;
  return Timestamp{floor_div(t.ms - offset, len) * len + offset};
}

const BucketCell* Bucket::cell(EmotionKind kind) const {
  for (const auto& c : cells) {
    if (c.emotion == kind) return &c;
  }
  return nullptr;
}

TimeSeries time_series(const Scope& scope, Granularity granularity, const ReactionFilter& filter,
                       std::span<const ReactionRecord> records) {
  filter.validate();
  TimeSeries series;
  series.granularity = granularity;
  series.scope = scope;
  series.filter = filter;
  if (filter.emotions) {
    series.emotions.assign(filter.emotions->begin(), filter.emotions->end());
  } else {
    series.emotions.assign(kAllEmotions.begin(), kAllEmotions.end());
  }

  std::vector<const ReactionRecord*> in;
  for (const auto& r : records) {
    if (scope.contains(r) && filter.matches(r)) in.push_back(&r);
  }
  if (in.empty()) return series;

  const std::int64_t len = bucket_length_ms(granularity);
  auto [lo, hi] = std::minmax_element(in.begin(), in.end(), [](const auto* a, const auto* b) {
    return a->captured_at < b->captured_at;
  });
  const Timestamp first = bucket_start((*lo)->captured_at, granularity);
  const Timestamp last = bucket_start((*hi)->captured_at, granularity);
  const auto n = static_cast<std::size_t>((last.ms - first.ms) / len + 1);

  std::vector<std::array<Accumulator, kEmotionCount>> acc(n);
  for (const auto* r : in) {
    const auto idx = static_cast<std::size_t>((bucket_start(r->captured_at, granularity).ms - first.ms) / len);
    acc[idx][index_of(r->emotion)].add(r->intensity.value());
  }

  series.buckets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Bucket b;
    b.start = Timestamp{first.ms + static_cast<std::int64_t>(i) * len};
    for (EmotionKind k : series.emotions) {
      const auto& a = acc[i][index_of(k)];
      b.cells.push_back({k, a.count, a.mean()});
    }
    series.buckets.push_back(std::move(b));
  }
  return series;
}

TimeSeries member_trend(const std::string& board_id, const std::string& member_id,
                        Granularity granularity, std::span<const ReactionRecord> records) {
  ReactionFilter f;
  f.member_id = member_id;
  return time_series(Scope{board_id, std::nullopt}, granularity, f, records);
}

std::vector<Peak> detect_peaks(const TimeSeries& series, EmotionKind emotion) {
  std::vector<Rational> effective;
  std::vector<bool> present;
  effective.reserve(series.buckets.size());
  for (const auto& b : series.buckets) {
    const BucketCell* c = b.cell(emotion);
    const bool has = c && c->mean.has_value();
    present.push_back(has);
    effective.push_back(has ? *c->mean : Rational(0));
  }

  std::vector<Peak> peaks;
  for (std::size_t i = 0; i < effective.size(); ++i) {
    if (!present[i]) continue;
    if (i > 0 && !(effective[i] > effective[i - 1])) continue;
    if (i + 1 < effective.size() && !(effective[i] > effective[i + 1])) continue;
    peaks.push_back({emotion, series.buckets[i].start, effective[i]});
  }
  return peaks;
}

StageBreakdown stage_breakdown(const Scope& scope, std::span<const ReactionRecord> records) {
  std::map<Stage, std::array<Accumulator, kEmotionCount>> groups;
  for (const auto& r : records) {
    if (!scope.contains(r)) continue;
    groups[r.stage][index_of(r.emotion)].add(r.intensity.value());
  }
  StageBreakdown out;
  for (const auto& [stage, acc] : groups) {
    StageStats s;
    s.stage = stage;
    for (EmotionKind k : kAllEmotions) {
      const auto& a = acc[index_of(k)];
      s.total += a.count;
      s.cells.push_back({k, a.count, a.mean()});
    }
    out.stages.push_back(std::move(s));
  }
  return out;
}

double to_double(const Rational& r) noexcept {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

nlohmann::json rational_json(const std::optional<Rational>& r) {
  if (!r) return nullptr;
  return to_double(*r);
}

namespace {

nlohmann::json cell_json(const BucketCell& c) {
  return {{"emotion", to_string(c.emotion)}, {"count", c.count}, {"mean", rational_json(c.mean)}};
}

nlohmann::json optional_int(const std::optional<int>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

nlohmann::json to_json(const CardSummary& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"emotion", to_string(r.emotion)},
                    {"count", r.count},
                    {"mean", rational_json(r.mean)},
                    {"min", optional_int(r.min)},
                    {"max", optional_int(r.max)},
                    {"latest", optional_int(r.latest)}});
  }
  return {{"card_id", s.card_id}, {"respondent_count", s.respondent_count}, {"emotions", rows}};
}

nlohmann::json to_json(const TimeSeries& s) {
  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& b : s.buckets) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : b.cells) cells.push_back(cell_json(c));
    buckets.push_back({{"start", format_rfc3339(b.start)}, {"emotions", cells}});
  }
  nlohmann::json emotions = nlohmann::json::array();
  for (auto k : s.emotions) emotions.push_back(to_string(k));
  nlohmann::json scope = {{"board_id", s.scope.board_id}};
  if (s.scope.card_id) scope["card_id"] = *s.scope.card_id;
  return {{"granularity", to_string(s.granularity)},
          {"timezone", "UTC"},
          {"scope", scope},
          {"emotions", emotions},
          {"buckets", buckets}};
}

nlohmann::json to_json(const Peak& p) {
  return {{"emotion", to_string(p.emotion)},
          {"bucket_start", format_rfc3339(p.bucket_start)},
          {"mean", to_double(p.mean)}};
}

nlohmann::json to_json(const StageBreakdown& b) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : b.stages) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : s.cells) cells.push_back(cell_json(c));
    stages.push_back({{"stage_id", s.stage.id},
                      {"stage_name", s.stage.name},
                      {"count", s.total},
                      {"emotions", cells}});
  }
  return stages;
}

}  // namespace emotrack
