#pragma once

#include <json.hpp>

namespace emotrack::testing {

// 1 board, 3 lists, 2 cards, 4 members (1 admin); shared by the provider
// contract suite for both implementations.
inline nlohmann::json contract_roster() {
  return nlohmann::json::parse(R"({
    "boards": [{
      "id": "b1",
      "name": "Sprint board",
      "lists": [
        {"id": "l-todo", "name": "To Do"},
        {"id": "l-doing", "name": "Doing"},
        {"id": "l-done", "name": "Done"}
      ],
      "cards": [
        {"id": "c-login", "title": "Login page", "list": "l-doing"},
        {"id": "c-search", "title": "Search", "list": "l-todo"}
      ],
      "members": [
        {"id": "alice", "name": "Alice"},
        {"id": "bob", "name": "Bob"},
        {"id": "carol", "name": "Carol"},
        {"id": "dave", "name": "Dave"}
      ],
      "admins": ["alice"]
    }]
  })");
}

}  // namespace emotrack::testing
