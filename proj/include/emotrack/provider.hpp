#pragma once

#include <string>
#include <vector>

#include "emotrack/record.hpp"

namespace emotrack {

struct Card {
  std::string id;
  std::string board_id;
  std::string title;
  Stage stage;

  friend bool operator==(const Card&, const Card&) = default;
};

struct Member {
  std::string id;
  std::string name;

  friend bool operator==(const Member&, const Member&) = default;
};

// Source of truth for boards, cards, stages and admin membership.
//
// Errors are reported as emotrack::Error:
//   kNotFound  - the card/board does not exist
//   kUpstream  - the backing system could not be reached or answered badly
//
// Implementations must be safe to call from concurrent request handlers.
// get_stage(c) always agrees with get_card(c).stage.
class BoardStateProvider {
 public:
  virtual ~BoardStateProvider() = default;

  virtual Card get_card(const std::string& card_id) = 0;
  virtual std::vector<Card> list_cards(const std::string& board_id) = 0;
  virtual Stage get_stage(const std::string& card_id) = 0;
  virtual bool is_admin(const std::string& member_id, const std::string& board_id) = 0;
  virtual std::vector<Member> list_members(const std::string& board_id) = 0;
};

}  // namespace emotrack
