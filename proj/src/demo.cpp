#include "emotrack/demo.hpp"

#include "emotrack/analytics.hpp"
#include "emotrack/error.hpp"

namespace emotrack::demo {
namespace {

struct Step {
  int day;       // relative to the day containing `now`
  int minute;    // minute of that day, UTC
  const char* member;
  const char* card;
  std::map<EmotionKind, std::int64_t> ratings;
};

struct Move {
  int day;
  int minute;
  const char* card;
  const char* list;
};

}  // namespace

nlohmann::json roster_document() {
  return nlohmann::json::parse(R"({
    "boards": [{
      "id": "demo-board",
      "name": "Free-to-play mobile game",
      "lists": [
        {"id": "todo", "name": "To Do"},
        {"id": "doing", "name": "In Progress"},
        {"id": "review", "name": "Review"},
        {"id": "done", "name": "Done"}
      ],
      "cards": [
        {"id": "microtransactions", "title": "Integrate microtransactions", "list": "doing"},
        {"id": "leaderboard", "title": "Global leaderboard", "list": "done"},
        {"id": "tutorial", "title": "Onboarding tutorial", "list": "review"},
        {"id": "art-pass", "title": "Character art pass", "list": "todo"}
      ],
      "members": [
        {"id": "kashumi", "name": "Kashumi"},
        {"id": "rashina", "name": "Rashina"},
        {"id": "tom", "name": "Tom"},
        {"id": "jeff", "name": "Jeff"},
        {"id": "damon", "name": "Damon"}
      ],
      "admins": ["rashina"]
    }]
  })");
}

std::size_t seed(ReactionStore& store, LocalRoster& roster, Timestamp now) {
  if (store.size() != 0) {
    throw Error(ErrorCode::kInvalidArgument, "demo data can only be seeded into an empty store");
  }
  using enum EmotionKind;
  const std::vector<Step> steps = {
      {-6, 10 * 60, "tom", "leaderboard", {{kHappiness, 5}, {kRelaxation, 4}, {kAnxiety, 2}}},
      {-5, 11 * 60, "jeff", "tutorial", {{kHappiness, 4}, {kAnxiety, 1}}},
      {-5, 13 * 60, "damon", "leaderboard", {{kDesire, 5}}},
      {-4, 14 * 60, "tom", "tutorial", {{kSadness, 2}}},
      {-4, 15 * 60, "jeff", "leaderboard", {{kAnxiety, 2}, {kHappiness, 6}}},
      {-3, 9 * 60 + 30, "kashumi", "microtransactions", {{kAnxiety, 4}, {kFear, 3}}},
      {-2, 15 * 60, "damon", "tutorial", {{kAnxiety, 2}, {kRelaxation, 5}}},
      {-1, 16 * 60, "tom", "art-pass", {{kHappiness, 6}, {kAnxiety, 1}}},
      {-1, 16 * 60 + 5, "jeff", "art-pass", {{kDesire, 4}}},
  };
  const std::vector<Move> moves = {
      {-7, 0, "leaderboard", "doing"},
      {-7, 0, "tutorial", "doing"},
      {-4, 12 * 60, "leaderboard", "review"},
      {-3, 8 * 60, "tutorial", "review"},
      {-2, 10 * 60, "leaderboard", "done"},
  };

  const Timestamp today = bucket_start(now, Granularity::kDay);
  auto at = [&](int day, int minute) {
    return Timestamp{today.ms + day * kMsPerDay + minute * 60 * kMsPerSecond};
  };

  std::size_t written = 0;
  std::size_t next_move = 0;
  for (const auto& s : steps) {
    const Timestamp t = at(s.day, s.minute);
    while (next_move < moves.size() && at(moves[next_move].day, moves[next_move].minute) <= t) {
      roster.move_card(moves[next_move].card, moves[next_move].list);
      ++next_move;
    }
    ReactionBatch batch{std::string(kBoardId), s.card, s.member, s.ratings};
    written += store.append_batch(batch, t, roster).size();
  }
  for (; next_move < moves.size(); ++next_move) {
    roster.move_card(moves[next_move].card, moves[next_move].list);
  }
  return written;
}

}  // namespace emotrack::demo
