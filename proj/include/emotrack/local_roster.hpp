#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "emotrack/error.hpp"
#include "emotrack/provider.hpp"

namespace emotrack {

// Every referential-integrity problem found in a roster document, each
// prefixed with its JSON path (e.g. "boards[0].cards[1].list").
class RosterValidationError : public Error {
 public:
  explicit RosterValidationError(std::vector<std::string> issues);

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

// In-memory provider loaded from a declarative document:
//
//   {"boards": [{"id": "b", "name": "...",
//                "lists":   [{"id": "todo", "name": "To Do"}],
//                "cards":   [{"id": "c1", "title": "...", "list": "todo"}],
//                "members": [{"id": "m1", "name": "..."}],
//                "admins":  ["m1"]}]}
//
// Card ids are unique across boards.
class LocalRoster final : public BoardStateProvider {
 public:
  // Throws RosterValidationError.
  static std::unique_ptr<LocalRoster> load(const nlohmann::json& document);
  // Throws Error(kIo) when unreadable, Error(kMalformed) when not JSON.
  static std::unique_ptr<LocalRoster> load_file(const std::string& path);

  Card get_card(const std::string& card_id) override;
  std::vector<Card> list_cards(const std::string& board_id) override;
  Stage get_stage(const std::string& card_id) override;
  bool is_admin(const std::string& member_id, const std::string& board_id) override;
  std::vector<Member> list_members(const std::string& board_id) override;

  // Moves a card to another list on its board. Throws Error(kNotFound).
  void move_card(const std::string& card_id, const std::string& list_id);

  nlohmann::json to_document() const;

 private:
  struct CardEntry {
    std::string board_id;
    std::string title;
    std::string list_id;
  };
  struct BoardEntry {
    std::string name;
    std::vector<Stage> lists;
    std::vector<std::string> card_order;
    std::vector<Member> members;
    std::vector<std::string> admins;
  };

  LocalRoster() = default;
  Card make_card(const std::string& card_id, const CardEntry& entry) const;

  mutable std::shared_mutex mu_;
  std::map<std::string, BoardEntry> boards_;
  std::vector<std::string> board_order_;
  std::map<std::string, CardEntry> cards_;
};

}  // namespace emotrack
