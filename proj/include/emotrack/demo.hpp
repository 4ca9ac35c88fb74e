#pragma once

#include <string_view>

#include <json.hpp>

#include "emotrack/local_roster.hpp"
#include "emotrack/store.hpp"

// Built-in demo board: a mobile-game team where Kashumi is anxious about the
// microtransactions card and Rashina, the board admin, reviews the dashboard.
namespace emotrack::demo {

inline constexpr std::string_view kBoardId = "demo-board";
inline constexpr std::string_view kCardId = "microtransactions";
inline constexpr std::string_view kMemberId = "kashumi";
inline constexpr std::string_view kManagerId = "rashina";

nlohmann::json roster_document();

// Writes a week of reaction history ending the day before `now`. The roster
// is left in its document layout. Throws Error(kInvalidArgument) when the
// store already holds records.
std::size_t seed(ReactionStore& store, LocalRoster& roster, Timestamp now);

}  // namespace emotrack::demo
