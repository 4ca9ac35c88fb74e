#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace emotrack {

// Discrete emotion vocabulary. Enumerator order is the canonical order and
// must never change: it is used for sorting, serialization and indexing.
enum class EmotionKind : std::uint8_t {
  kAnger,
  kDisgust,
  kFear,
  kAnxiety,
  kSadness,
  kHappiness,
  kRelaxation,
  kDesire,
};

inline constexpr std::size_t kEmotionCount = 8;

inline constexpr std::array<EmotionKind, kEmotionCount> kAllEmotions = {
    EmotionKind::kAnger,     EmotionKind::kDisgust,    EmotionKind::kFear,
    EmotionKind::kAnxiety,   EmotionKind::kSadness,    EmotionKind::kHappiness,
    EmotionKind::kRelaxation, EmotionKind::kDesire,
};

constexpr std::size_t index_of(EmotionKind kind) noexcept {
  return static_cast<std::size_t>(kind);
}

// Lowercase canonical name ("anger", ...).
std::string_view to_string(EmotionKind kind) noexcept;

// Case-insensitive match against canonical names. No aliases.
std::optional<EmotionKind> parse_kind(std::string_view text);

// Same as parse_kind but throws Error(kUnknownKind).
EmotionKind parse_kind_or_throw(std::string_view text);

// Likert intensity 1..7 (1 = "not at all", 7 = "an extreme amount").
class Intensity {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 7;

  // Throws Error(kInvalidRating) when out of range.
  explicit Intensity(int value);

  static std::optional<Intensity> make(std::int64_t value) noexcept;

  int value() const noexcept { return value_; }

  friend bool operator==(Intensity, Intensity) = default;
  friend auto operator<=>(Intensity, Intensity) = default;

 private:
  struct Unchecked {};
  Intensity(int value, Unchecked) noexcept : value_(value) {}
  int value_;
};

struct RatingCheck {
  bool valid = true;
  std::int64_t offending_value = 0;  // meaningful only when !valid

  explicit operator bool() const noexcept { return valid; }
};

RatingCheck validate_rating(EmotionKind kind, std::int64_t value) noexcept;

enum class Valence : std::uint8_t { kPositive, kNegative };
enum class Arousal : std::uint8_t { kHigh, kLow };
enum class Motivation : std::uint8_t { kApproach, kWithdrawal };

std::string_view to_string(Valence v) noexcept;
std::string_view to_string(Arousal a) noexcept;
std::string_view to_string(Motivation m) noexcept;

struct EmotionDescriptor {
  EmotionKind kind;
  Valence valence;
  Arousal arousal;
  Motivation motivation;
  std::string glyph;
  std::string label;

  friend bool operator==(const EmotionDescriptor&, const EmotionDescriptor&) = default;
};

struct EmotionSchema {
  int version = 1;
  std::vector<EmotionDescriptor> descriptors;

  const EmotionDescriptor& descriptor(EmotionKind kind) const;

  friend bool operator==(const EmotionSchema&, const EmotionSchema&) = default;
};

inline constexpr int kCurrentSchemaVersion = 1;

EmotionSchema default_schema();

Valence valence(EmotionKind kind) noexcept;

nlohmann::json to_json(const EmotionSchema& schema);

}  // namespace emotrack
