#include "emotrack/store.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>

#include "emotrack/error.hpp"

namespace emotrack {
namespace {

// Parses ids produced by make_record_id; anything else yields 0.
std::uint64_t parse_record_seq(const std::string& id) {
  if (id.size() != 17 || id[0] != 'r') return 0;
  std::uint64_t v = 0;
  for (std::size_t i = 1; i < id.size(); ++i) {
    if (id[i] < '0' || id[i] > '9') return 0;
    v = v * 10 + static_cast<std::uint64_t>(id[i] - '0');
  }
  return v;
}

}  // namespace

std::string make_record_id(std::uint64_t seq) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "r%016llu", static_cast<unsigned long long>(seq));
  return buf;
}

ReactionStore::ReactionStore() : ReactionStore(std::make_unique<MemoryBackend>()) {}

ReactionStore::ReactionStore(std::unique_ptr<StorageBackend> backend)
    : backend_(std::move(backend)) {
  records_ = backend_->load();
  std::sort(records_.begin(), records_.end(), record_less);
  index_ids(records_);
  if (auto top = backend_->max_record_id()) next_seq_ = std::max(next_seq_, parse_record_seq(*top) + 1);
}

void ReactionStore::index_ids(const std::vector<ReactionRecord>& records) {
  for (const auto& r : records) {
    ids_.insert(r.record_id);
    next_seq_ = std::max(next_seq_, parse_record_seq(r.record_id) + 1);
    last_captured_ = std::max(last_captured_, r.captured_at);
  }
}

std::vector<ReactionRecord> ReactionStore::append_batch(const ReactionBatch& batch, Timestamp now,
                                                        BoardStateProvider& stage_lookup) {
  if (batch.ratings.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "reaction batch has no ratings");
  }
  for (const auto& [kind, value] : batch.ratings) {
    if (auto check = validate_rating(kind, value); !check) {
      throw Error(ErrorCode::kInvalidRating,
                  "rating for " + std::string(to_string(kind)) + " is " +
                      std::to_string(check.offending_value) + ", expected 1..7");
    }
  }

  Card card;
  try {
    card = stage_lookup.get_card(batch.card_id);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotFound) {
      throw Error(ErrorCode::kUnknownCard, "unknown card '" + batch.card_id + "'");
    }
    throw;
  }
  if (card.board_id != batch.board_id) {
    throw Error(ErrorCode::kUnknownCard,
                "card '" + batch.card_id + "' is not on board '" + batch.board_id + "'");
  }

  std::unique_lock lock(mu_);
  const Timestamp captured = std::max(now, last_captured_);
  std::vector<ReactionRecord> created;
  created.reserve(batch.ratings.size());
  std::uint64_t seq = next_seq_;
  // std::map iterates in enum order, which is the canonical emotion order.
  for (const auto& [kind, value] : batch.ratings) {
    ReactionRecord r;
    r.record_id = make_record_id(seq++);
    r.board_id = batch.board_id;
    r.card_id = batch.card_id;
    r.member_id = batch.member_id;
    r.emotion = kind;
    r.intensity = Intensity(static_cast<int>(value));
    r.captured_at = captured;
    r.stage = card.stage;
    r.schema_version = kCurrentSchemaVersion;
    created.push_back(std::move(r));
  }

  backend_->append(created);

  next_seq_ = seq;
  last_captured_ = captured;
  for (const auto& r : created) {
    ids_.insert(r.record_id);
    records_.push_back(r);
  }
  return created;
}

void ReactionStore::restore(std::vector<ReactionRecord> records) {
  std::unique_lock lock(mu_);
  std::unordered_set<std::string> incoming;
  for (const auto& r : records) {
    if (ids_.contains(r.record_id) || !incoming.insert(r.record_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate record_id '" + r.record_id + "'");
    }
  }
  backend_->append(records);
  index_ids(records);
  records_.insert(records_.end(), std::make_move_iterator(records.begin()),
                  std::make_move_iterator(records.end()));
  std::sort(records_.begin(), records_.end(), record_less);
}

std::vector<ReactionRecord> ReactionStore::query(const ReactionFilter& filter) const {
  filter.validate();
  std::shared_lock lock(mu_);
  std::vector<ReactionRecord> out;
  for (const auto& r : records_) {
    if (filter.matches(r)) out.push_back(r);
  }
  return out;
}

LatestMap ReactionStore::latest_per_member(const std::string& card_id) const {
  ReactionFilter f;
  f.card_id = card_id;
  return emotrack::latest_per_member(query(f));
}

void ReactionStore::export_records(const ReactionFilter& filter, ExportFormat format,
                                   std::ostream& out) const {
  write_export(query(filter), format, out);
}

std::size_t ReactionStore::purge_member(const std::string& board_id, const std::string& member_id) {
  std::unique_lock lock(mu_);
  backend_->erase_member(board_id, member_id);
  const auto removed = std::erase_if(records_, [&](const ReactionRecord& r) {
    if (r.board_id == board_id && r.member_id == member_id) {
      ids_.erase(r.record_id);
      return true;
    }
    return false;
  });
  return removed;
}

std::size_t ReactionStore::size() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

}  // namespace emotrack
