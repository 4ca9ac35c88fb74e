#include "emotrack/trello.hpp"

#include <mutex>

#include "emotrack/error.hpp"
#include "emotrack/log.hpp"

namespace emotrack {
namespace {

// Ids are interpolated into request paths.
void check_path_id(const std::string& id, const char* what) {
  if (id.empty() || id.find_first_of("/?#%\\ ") != std::string::npos) {
    throw Error(ErrorCode::kNotFound, std::string("invalid ") + what + " id '" + id + "'");
  }
}

const nlohmann::json* find_object(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  return it != j.end() && it->is_object() ? &*it : nullptr;
}

std::string string_or_empty(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : std::string();
}

}  // namespace

std::string_view to_string(WebhookOutcome outcome) noexcept {
  switch (outcome) {
    case WebhookOutcome::kStageUpdated: return "stage_updated";
    case WebhookOutcome::kIgnoredType: return "ignored_type";
    case WebhookOutcome::kIgnoredBoard: return "ignored_board";
  }
  return "ignored_type";
}

TrelloAdapter::TrelloAdapter(TrelloConfig config, std::shared_ptr<HttpTransport> transport,
                             Clock clock)
    : config_(std::move(config)), transport_(std::move(transport)), clock_(std::move(clock)) {}

nlohmann::json TrelloAdapter::fetch(const std::string& path, const HttpParams& params) {
  const HttpHeaders headers = {
      {"Accept", "application/json"},
      {"Authorization", "OAuth oauth_consumer_key=\"" + config_.api_key + "\", oauth_token=\"" +
                            config_.api_token + "\""},
  };
  const HttpResponse res = transport_->get(path, params, headers);
  if (res.status == 404) throw Error(ErrorCode::kNotFound, "upstream 404 for " + path);
  if (res.status < 200 || res.status >= 300) {
    throw Error(ErrorCode::kUpstream, "upstream status " + std::to_string(res.status) + " for " + path);
  }
  auto j = nlohmann::json::parse(res.body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kUpstream, "upstream returned invalid JSON for " + path);
  return j;
}

std::string TrelloAdapter::remote_board(const std::string& local) const {
  if (config_.boards.empty()) return local;
  auto it = config_.boards.find(local);
  if (it == config_.boards.end()) throw Error(ErrorCode::kNotFound, "board '" + local + "' is not configured");
  return it->second;
}

std::optional<std::string> TrelloAdapter::local_board(const std::string& remote) const {
  if (config_.boards.empty()) return remote;
  for (const auto& [local, r] : config_.boards) {
    if (r == remote) return local;
  }
  return std::nullopt;
}

bool TrelloAdapter::fresh(Timestamp fetched_at) const {
  return clock_().ms - fetched_at.ms < config_.stage_ttl.count();
}

std::string TrelloAdapter::list_name(const std::string& remote_board, const std::string& list_id) {
  {
    std::shared_lock lock(mu_);
    auto it = lists_.find(remote_board);
    if (it != lists_.end() && fresh(it->second.fetched_at)) {
      auto name = it->second.names.find(list_id);
      if (name != it->second.names.end()) return name->second;
    }
  }
  check_path_id(remote_board, "board");
  const auto lists = fetch("/1/boards/" + remote_board + "/lists", {{"fields", "id,name"}, {"filter", "all"}});
  if (!lists.is_array()) throw Error(ErrorCode::kUpstream, "board lists response is not an array");
  CachedLists cached{{}, clock_()};
  for (const auto& l : lists) {
    if (l.is_object()) cached.names[string_or_empty(l, "id")] = string_or_empty(l, "name");
  }
  std::unique_lock lock(mu_);
  auto& slot = lists_[remote_board] = std::move(cached);
  auto name = slot.names.find(list_id);
  if (name == slot.names.end()) {
    throw Error(ErrorCode::kUpstream, "list '" + list_id + "' not found on board '" + remote_board + "'");
  }
  return name->second;
}

Card TrelloAdapter::get_card(const std::string& card_id) {
  {
    std::shared_lock lock(mu_);
    auto it = cards_.find(card_id);
    if (it != cards_.end() && fresh(it->second.fetched_at)) return it->second.card;
  }
  check_path_id(card_id, "card");
  const auto j = fetch("/1/cards/" + card_id, {{"fields", "id,name,idList,idBoard"}});
  const std::string remote = string_or_empty(j, "idBoard");
  const std::string list_id = string_or_empty(j, "idList");
  if (remote.empty() || list_id.empty()) {
    throw Error(ErrorCode::kUpstream, "card response for '" + card_id + "' lacks idBoard/idList");
  }
  auto local = local_board(remote);
  if (!local) throw Error(ErrorCode::kNotFound, "card '" + card_id + "' is on an unconfigured board");

  Card card{card_id, *local, string_or_empty(j, "name"), Stage{list_id, list_name(remote, list_id)}};
  std::unique_lock lock(mu_);
  cards_[card_id] = CachedCard{card, clock_()};
  return card;
}

std::vector<Card> TrelloAdapter::list_cards(const std::string& board_id) {
  const std::string remote = remote_board(board_id);
  check_path_id(remote, "board");
  const auto j = fetch("/1/boards/" + remote + "/cards", {{"fields", "id,name,idList,idBoard"}});
  if (!j.is_array()) throw Error(ErrorCode::kUpstream, "board cards response is not an array");
  std::vector<Card> out;
  for (const auto& c : j) {
    if (!c.is_object()) continue;
    const std::string list_id = string_or_empty(c, "idList");
    out.push_back(Card{string_or_empty(c, "id"), board_id, string_or_empty(c, "name"),
                       Stage{list_id, list_name(remote, list_id)}});
  }
  const Timestamp now = clock_();
  std::unique_lock lock(mu_);
  for (const auto& card : out) cards_[card.id] = CachedCard{card, now};
  return out;
}

Stage TrelloAdapter::get_stage(const std::string& card_id) { return get_card(card_id).stage; }

bool TrelloAdapter::is_admin(const std::string& member_id, const std::string& board_id) {
  const std::string remote = remote_board(board_id);
  check_path_id(remote, "board");
  nlohmann::json j;
  try {
    j = fetch("/1/boards/" + remote + "/memberships", {});
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotFound) return false;
    throw;
  }
  if (!j.is_array()) throw Error(ErrorCode::kUpstream, "memberships response is not an array");
  for (const auto& m : j) {
    if (m.is_object() && string_or_empty(m, "idMember") == member_id) {
      return string_or_empty(m, "memberType") == "admin";
    }
  }
  return false;
}

std::vector<Member> TrelloAdapter::list_members(const std::string& board_id) {
  const std::string remote = remote_board(board_id);
  check_path_id(remote, "board");
  const auto j = fetch("/1/boards/" + remote + "/members", {{"fields", "id,fullName"}});
  if (!j.is_array()) throw Error(ErrorCode::kUpstream, "members response is not an array");
  std::vector<Member> out;
  for (const auto& m : j) {
    if (m.is_object()) out.push_back({string_or_empty(m, "id"), string_or_empty(m, "fullName")});
  }
  return out;
}

WebhookOutcome TrelloAdapter::webhook_ingest(const nlohmann::json& event) {
  const nlohmann::json* action = event.is_object() ? find_object(event, "action") : nullptr;
  if (!action) throw Error(ErrorCode::kMalformed, "webhook event has no action object");
  const std::string type = string_or_empty(*action, "type");
  if (type.empty()) throw Error(ErrorCode::kMalformed, "webhook action has no type");

  const nlohmann::json* data = find_object(*action, "data");
  std::string remote;
  if (data) {
    if (const auto* board = find_object(*data, "board")) remote = string_or_empty(*board, "id");
  }
  if (remote.empty()) {
    if (const auto* model = find_object(event, "model")) remote = string_or_empty(*model, "id");
  }

  const nlohmann::json* card = data ? find_object(*data, "card") : nullptr;
  const nlohmann::json* list_after = data ? find_object(*data, "listAfter") : nullptr;
  if (type == "createCard" && data) list_after = find_object(*data, "list");
  const bool is_move = (type == "updateCard" || type == "createCard") && card && list_after;
  if (!is_move) return WebhookOutcome::kIgnoredType;

  auto local = local_board(remote);
  if (remote.empty() || !local) {
    log_warning("ignoring webhook event for unknown board '" + remote + "'");
    return WebhookOutcome::kIgnoredBoard;
  }

  const std::string card_id = string_or_empty(*card, "id");
  const std::string list_id = string_or_empty(*list_after, "id");
  if (card_id.empty() || list_id.empty()) {
    throw Error(ErrorCode::kMalformed, "move event lacks card or list id");
  }
  Stage stage{list_id, string_or_empty(*list_after, "name")};

  const Timestamp now = clock_();
  std::unique_lock lock(mu_);
  auto it = cards_.find(card_id);
  Card updated = it != cards_.end() ? it->second.card : Card{card_id, *local, string_or_empty(*card, "name"), {}};
  updated.board_id = *local;
  if (auto name = string_or_empty(*card, "name"); !name.empty()) updated.title = name;
  if (stage.name.empty()) {
    auto lists = lists_.find(remote);
    if (lists != lists_.end()) {
      auto n = lists->second.names.find(list_id);
      if (n != lists->second.names.end()) stage.name = n->second;
    }
  }
  if (stage.name.empty()) {
    // Cannot name the stage; drop the entry so the next read refetches.
    cards_.erase(card_id);
    return WebhookOutcome::kStageUpdated;
  }
  updated.stage = stage;
  cards_[card_id] = CachedCard{updated, now};
  return WebhookOutcome::kStageUpdated;
}

}  // namespace emotrack
