#include "emotrack/local_roster.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

namespace emotrack {
namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out = "invalid roster:";
  for (const auto& i : issues) out += "\n  " + i;
  return out;
}

// Reads a required non-empty string field, recording an issue otherwise.
std::string string_field(const nlohmann::json& obj, const char* key, const std::string& path,
                         std::vector<std::string>& issues) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string() || it->get<std::string>().empty()) {
    issues.push_back(path + "." + key + ": missing or not a non-empty string");
    return {};
  }
  return it->get<std::string>();
}

const nlohmann::json& array_field(const nlohmann::json& obj, const char* key, const std::string& path,
                                  std::vector<std::string>& issues) {
  static const nlohmann::json kEmpty = nlohmann::json::array();
  auto it = obj.find(key);
  if (it == obj.end()) return kEmpty;
  if (!it->is_array()) {
    issues.push_back(path + "." + key + ": must be an array");
    return kEmpty;
  }
  return *it;
}

}  // namespace

RosterValidationError::RosterValidationError(std::vector<std::string> issues)
    : Error(ErrorCode::kConfig, join_issues(issues)), issues_(std::move(issues)) {}

std::unique_ptr<LocalRoster> LocalRoster::load(const nlohmann::json& doc) {
  std::vector<std::string> issues;
  std::unique_ptr<LocalRoster> roster(new LocalRoster());

  if (!doc.is_object() || !doc.contains("boards") || !doc["boards"].is_array()) {
    throw RosterValidationError({"$.boards: missing or not an array"});
  }

  const auto& boards = doc["boards"];
  for (std::size_t b = 0; b < boards.size(); ++b) {
    const std::string bpath = "boards[" + std::to_string(b) + "]";
    const auto& bj = boards[b];
    if (!bj.is_object()) {
      issues.push_back(bpath + ": must be an object");
      continue;
    }
    const std::string board_id = string_field(bj, "id", bpath, issues);
    if (board_id.empty()) continue;
    if (roster->boards_.contains(board_id)) {
      issues.push_back(bpath + ".id: duplicate board '" + board_id + "'");
      continue;
    }
    BoardEntry entry;
    entry.name = bj.value("name", board_id);

    std::set<std::string> list_ids;
    const auto& lists = array_field(bj, "lists", bpath, issues);
    for (std::size_t l = 0; l < lists.size(); ++l) {
      const std::string lpath = bpath + ".lists[" + std::to_string(l) + "]";
      if (!lists[l].is_object()) {
        issues.push_back(lpath + ": must be an object");
        continue;
      }
      std::string id = string_field(lists[l], "id", lpath, issues);
      if (id.empty()) continue;
      if (!list_ids.insert(id).second) {
        issues.push_back(lpath + ".id: duplicate list '" + id + "'");
        continue;
      }
      entry.lists.push_back({id, lists[l].value("name", id)});
    }

    std::set<std::string> member_ids;
    const auto& members = array_field(bj, "members", bpath, issues);
    for (std::size_t m = 0; m < members.size(); ++m) {
      const std::string mpath = bpath + ".members[" + std::to_string(m) + "]";
      if (!members[m].is_object()) {
        issues.push_back(mpath + ": must be an object");
        continue;
      }
      std::string id = string_field(members[m], "id", mpath, issues);
      if (id.empty()) continue;
      if (!member_ids.insert(id).second) {
        issues.push_back(mpath + ".id: duplicate member '" + id + "'");
        continue;
      }
      entry.members.push_back({id, members[m].value("name", id)});
    }

    const auto& admins = array_field(bj, "admins", bpath, issues);
    for (std::size_t a = 0; a < admins.size(); ++a) {
      const std::string apath = bpath + ".admins[" + std::to_string(a) + "]";
      if (!admins[a].is_string()) {
        issues.push_back(apath + ": must be a string");
        continue;
      }
      const auto id = admins[a].get<std::string>();
      if (!member_ids.contains(id)) {
        issues.push_back(apath + ": admin '" + id + "' is not a member of board '" + board_id + "'");
        continue;
      }
      entry.admins.push_back(id);
    }

    const auto& cards = array_field(bj, "cards", bpath, issues);
    for (std::size_t c = 0; c < cards.size(); ++c) {
      const std::string cpath = bpath + ".cards[" + std::to_string(c) + "]";
      if (!cards[c].is_object()) {
        issues.push_back(cpath + ": must be an object");
        continue;
      }
      std::string id = string_field(cards[c], "id", cpath, issues);
      std::string list = string_field(cards[c], "list", cpath, issues);
      if (id.empty() || list.empty()) continue;
      if (roster->cards_.contains(id)) {
        issues.push_back(cpath + ".id: duplicate card '" + id + "'");
        continue;
      }
      if (!list_ids.contains(list)) {
        issues.push_back(cpath + ".list: card '" + id + "' references unknown list '" + list + "'");
        continue;
      }
      roster->cards_[id] = CardEntry{board_id, cards[c].value("title", id), list};
      entry.card_order.push_back(id);
    }

    roster->board_order_.push_back(board_id);
    roster->boards_.emplace(board_id, std::move(entry));
  }

  if (!issues.empty()) throw RosterValidationError(std::move(issues));
  return roster;
}

std::unique_ptr<LocalRoster> LocalRoster::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read roster '" + path + "'");
  auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kMalformed, "roster '" + path + "' is not valid JSON");
  return load(doc);
}

Card LocalRoster::make_card(const std::string& card_id, const CardEntry& entry) const {
  const auto& lists = boards_.at(entry.board_id).lists;
  auto it = std::find_if(lists.begin(), lists.end(),
                         [&](const Stage& s) { return s.id == entry.list_id; });
  return Card{card_id, entry.board_id, entry.title, *it};
}

Card LocalRoster::get_card(const std::string& card_id) {
  std::shared_lock lock(mu_);
  auto it = cards_.find(card_id);
  if (it == cards_.end()) throw Error(ErrorCode::kNotFound, "no card '" + card_id + "'");
  return make_card(card_id, it->second);
}

std::vector<Card> LocalRoster::list_cards(const std::string& board_id) {
  std::shared_lock lock(mu_);
  auto it = boards_.find(board_id);
  if (it == boards_.end()) throw Error(ErrorCode::kNotFound, "no board '" + board_id + "'");
  std::vector<Card> out;
  for (const auto& id : it->second.card_order) out.push_back(make_card(id, cards_.at(id)));
  return out;
}

Stage LocalRoster::get_stage(const std::string& card_id) { return get_card(card_id).stage; }

bool LocalRoster::is_admin(const std::string& member_id, const std::string& board_id) {
  std::shared_lock lock(mu_);
  auto it = boards_.find(board_id);
  if (it == boards_.end()) return false;
  const auto& admins = it->second.admins;
  return std::find(admins.begin(), admins.end(), member_id) != admins.end();
}

std::vector<Member> LocalRoster::list_members(const std::string& board_id) {
  std::shared_lock lock(mu_);
  auto it = boards_.find(board_id);
  if (it == boards_.end()) throw Error(ErrorCode::kNotFound, "no board '" + board_id + "'");
  return it->second.members;
}

void LocalRoster::move_card(const std::string& card_id, const std::string& list_id) {
  std::unique_lock lock(mu_);
  auto it = cards_.find(card_id);
  if (it == cards_.end()) throw Error(ErrorCode::kNotFound, "no card '" + card_id + "'");
  const auto& lists = boards_.at(it->second.board_id).lists;
  if (std::none_of(lists.begin(), lists.end(), [&](const Stage& s) { return s.id == list_id; })) {
    throw Error(ErrorCode::kNotFound, "no list '" + list_id + "' on board '" + it->second.board_id + "'");
  }
  it->second.list_id = list_id;
}

nlohmann::json LocalRoster::to_document() const {
  std::shared_lock lock(mu_);
  nlohmann::json boards = nlohmann::json::array();
  for (const auto& board_id : board_order_) {
    const auto& b = boards_.at(board_id);
    nlohmann::json lists = nlohmann::json::array();
    for (const auto& l : b.lists) lists.push_back({{"id", l.id}, {"name", l.name}});
    nlohmann::json cards = nlohmann::json::array();
    for (const auto& id : b.card_order) {
      const auto& c = cards_.at(id);
      cards.push_back({{"id", id}, {"title", c.title}, {"list", c.list_id}});
    }
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : b.members) members.push_back({{"id", m.id}, {"name", m.name}});
    boards.push_back({{"id", board_id},
                      {"name", b.name},
                      {"lists", lists},
                      {"cards", cards},
                      {"members", members},
                      {"admins", b.admins}});
  }
  return {{"boards", boards}};
}

}  // namespace emotrack
