#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "emotrack/http_transport.hpp"
#include "emotrack/provider.hpp"
#include "emotrack/time.hpp"

namespace emotrack {

struct TrelloConfig {
  std::string base_url = "https://api.trello.com";
  std::string api_key;
  std::string api_token;
  // Local board id -> Trello board id. Empty means ids are used as-is and
  // webhook events for any board are accepted.
  std::map<std::string, std::string> boards;
  std::chrono::milliseconds stage_ttl = std::chrono::seconds(300);
};

enum class WebhookOutcome { kStageUpdated, kIgnoredType, kIgnoredBoard };

std::string_view to_string(WebhookOutcome outcome) noexcept;

// Trello REST adapter. A Trello list is a stage (1:1 by list id). Card and
// list lookups are cached for stage_ttl; webhook move events refresh the card
// cache without a fetch.
class TrelloAdapter final : public BoardStateProvider {
 public:
  TrelloAdapter(TrelloConfig config, std::shared_ptr<HttpTransport> transport, Clock clock);

  Card get_card(const std::string& card_id) override;
  std::vector<Card> list_cards(const std::string& board_id) override;
  Stage get_stage(const std::string& card_id) override;
  bool is_admin(const std::string& member_id, const std::string& board_id) override;
  std::vector<Member> list_members(const std::string& board_id) override;

  // Applies a POSTed action document. Throws Error(kMalformed) when the
  // document has no action type.
  WebhookOutcome webhook_ingest(const nlohmann::json& event);

 private:
  struct CachedCard {
    Card card;
    Timestamp fetched_at;
  };
  struct CachedLists {
    std::map<std::string, std::string> names;  // list id -> name
    Timestamp fetched_at;
  };

  nlohmann::json fetch(const std::string& path, const HttpParams& params);
  std::string remote_board(const std::string& local) const;
  std::optional<std::string> local_board(const std::string& remote) const;
  bool fresh(Timestamp fetched_at) const;
  std::string list_name(const std::string& remote_board, const std::string& list_id);

  TrelloConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  Clock clock_;
  mutable std::shared_mutex mu_;
  std::map<std::string, CachedCard> cards_;
  std::map<std::string, CachedLists> lists_;  // keyed by remote board id
};

}  // namespace emotrack
