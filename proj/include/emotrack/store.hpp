#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_set>
#include <vector>

#include "emotrack/provider.hpp"
#include "emotrack/record.hpp"
#include "emotrack/storage.hpp"

namespace emotrack {

// Append-only reaction log. Thread-safe: appends are atomic per batch and
// every query observes a consistent snapshot.
class ReactionStore {
 public:
  ReactionStore();
  explicit ReactionStore(std::unique_ptr<StorageBackend> backend);

  // One record per rating, sharing captured_at and the provider's current
  // stage for the card, returned in canonical emotion order.
  //
  // captured_at is max(now, last captured_at appended by this store), so a
  // single writer never observes time going backwards.
  //
  // Throws Error with kInvalidArgument (empty batch), kInvalidRating,
  // kUnknownCard, kUpstream (provider unreachable) or kStorage.
  std::vector<ReactionRecord> append_batch(const ReactionBatch& batch, Timestamp now,
                                           BoardStateProvider& stage_lookup);

  // Loads previously exported records verbatim (ids and timestamps kept).
  // Throws Error(kInvalidArgument) on a duplicate record_id.
  void restore(std::vector<ReactionRecord> records);

  std::vector<ReactionRecord> query(const ReactionFilter& filter) const;

  LatestMap latest_per_member(const std::string& card_id) const;

  void export_records(const ReactionFilter& filter, ExportFormat format, std::ostream& out) const;

  // The only delete: data-subject erasure. Returns number of records removed.
  std::size_t purge_member(const std::string& board_id, const std::string& member_id);

  std::size_t size() const;

 private:
  void index_ids(const std::vector<ReactionRecord>& records);

  mutable std::shared_mutex mu_;
  std::unique_ptr<StorageBackend> backend_;
  std::vector<ReactionRecord> records_;  // sorted by record_less
  std::unordered_set<std::string> ids_;
  std::uint64_t next_seq_ = 1;
  Timestamp last_captured_{INT64_MIN};
};

std::string make_record_id(std::uint64_t seq);

}  // namespace emotrack
