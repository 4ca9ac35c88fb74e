#include "emotrack/emotion.hpp"

#include <algorithm>
#include <cctype>

#include "emotrack/error.hpp"

namespace emotrack {
namespace {

constexpr std::array<std::string_view, kEmotionCount> kNames = {
    "anger", "disgust", "fear", "anxiety", "sadness", "happiness", "relaxation", "desire",
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view to_string(EmotionKind kind) noexcept { return kNames[index_of(kind)]; }

std::optional<EmotionKind> parse_kind(std::string_view text) {
  for (EmotionKind k : kAllEmotions) {
    if (iequals(text, kNames[index_of(k)])) return k;
  }
  return std::nullopt;
}

EmotionKind parse_kind_or_throw(std::string_view text) {
  if (auto k = parse_kind(text)) return *k;
  throw Error(ErrorCode::kUnknownKind, "unknown emotion '" + std::string(text) + "'");
}

Intensity::Intensity(int value) : value_(value) {
  if (value < kMin || value > kMax) {
    throw Error(ErrorCode::kInvalidRating,
                "intensity " + std::to_string(value) + " outside 1..7");
  }
}

std::optional<Intensity> Intensity::make(std::int64_t value) noexcept {
  if (value < kMin || value > kMax) return std::nullopt;
  return Intensity(static_cast<int>(value), Unchecked{});
}

RatingCheck validate_rating(EmotionKind, std::int64_t value) noexcept {
  if (value < Intensity::kMin || value > Intensity::kMax) return {false, value};
  return {};
}

std::string_view to_string(Valence v) noexcept {
  return v == Valence::kPositive ? "positive" : "negative";
}
std::string_view to_string(Arousal a) noexcept { return a == Arousal::kHigh ? "high" : "low"; }
std::string_view to_string(Motivation m) noexcept {
  return m == Motivation::kApproach ? "approach" : "withdrawal";
}

const EmotionDescriptor& EmotionSchema::descriptor(EmotionKind kind) const {
  auto it = std::find_if(descriptors.begin(), descriptors.end(),
                         [kind](const EmotionDescriptor& d) { return d.kind == kind; });
  if (it == descriptors.end()) {
    throw Error(ErrorCode::kUnknownKind, "schema has no descriptor for " + std::string(to_string(kind)));
  }
  return *it;
}

EmotionSchema default_schema() {
  using enum Valence;
  using enum Arousal;
  using enum Motivation;
  EmotionSchema s;
  s.version = kCurrentSchemaVersion;
  s.descriptors = {
      {EmotionKind::kAnger, kNegative, kHigh, kApproach, "\U0001F620", "Anger"},
      {EmotionKind::kDisgust, kNegative, kHigh, kWithdrawal, "\U0001F922", "Disgust"},
      {EmotionKind::kFear, kNegative, kHigh, kWithdrawal, "\U0001F628", "Fear"},
      {EmotionKind::kAnxiety, kNegative, kHigh, kWithdrawal, "\U0001F630", "Anxiety"},
      {EmotionKind::kSadness, kNegative, kLow, kWithdrawal, "\U0001F622", "Sadness"},
      {EmotionKind::kHappiness, kPositive, kHigh, kApproach, "\U0001F604", "Happiness"},
      {EmotionKind::kRelaxation, kPositive, kLow, kApproach, "\U0001F60C", "Relaxation"},
      {EmotionKind::kDesire, kPositive, kHigh, kApproach, "\U0001F60D", "Desire"},
  };
  return s;
}

Valence valence(EmotionKind kind) noexcept {
  switch (kind) {
    case EmotionKind::kHappiness:
    case EmotionKind::kRelaxation:
    case EmotionKind::kDesire:
      return Valence::kPositive;
    default:
      return Valence::kNegative;
  }
}

nlohmann::json to_json(const EmotionSchema& schema) {
  nlohmann::json emotions = nlohmann::json::array();
  for (const auto& d : schema.descriptors) {
    emotions.push_back({
        {"kind", to_string(d.kind)},
        {"label", d.label},
        {"glyph", d.glyph},
        {"valence", to_string(d.valence)},
        {"arousal", to_string(d.arousal)},
        {"motivation", to_string(d.motivation)},
    });
  }
  return {{"version", schema.version},
          {"scale", {{"min", Intensity::kMin},
                     {"max", Intensity::kMax},
                     {"min_label", "not at all"},
                     {"max_label", "an extreme amount"}}},
          {"emotions", std::move(emotions)}};
}

}  // namespace emotrack
