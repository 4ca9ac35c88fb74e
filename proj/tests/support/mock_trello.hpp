#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace httplib {
class Server;
}

namespace emotrack::testing {

// In-process HTTP server speaking the subset of the Trello REST API the
// adapter uses. Serves the same shape of data as a LocalRoster document.
class MockTrello {
 public:
  static constexpr const char* kApiKey = "test-key";
  static constexpr const char* kApiToken = "test-token";

  explicit MockTrello(const nlohmann::json& roster_document);
  ~MockTrello();

  MockTrello(const MockTrello&) = delete;
  MockTrello& operator=(const MockTrello&) = delete;

  std::string base_url() const;
  int request_count() const { return requests_.load(); }
  void reset_count() { requests_ = 0; }
  // While down every request answers 503.
  void set_down(bool down) { down_ = down; }
  void move_card(const std::string& card_id, const std::string& list_id);

 private:
  struct Board {
    nlohmann::json lists = nlohmann::json::array();
    std::vector<std::string> card_ids;
    nlohmann::json members = nlohmann::json::array();
    nlohmann::json memberships = nlohmann::json::array();
  };

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
  std::atomic<int> requests_{0};
  std::atomic<bool> down_{false};
  std::mutex mu_;
  std::map<std::string, Board> boards_;
  std::map<std::string, nlohmann::json> cards_;  // id -> {id, name, idList, idBoard}
};

}  // namespace emotrack::testing
