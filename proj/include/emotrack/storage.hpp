#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emotrack/record.hpp"

struct sqlite3;

namespace emotrack {

// Durability layer under ReactionStore. Backends only persist; all querying
// happens on the store's in-memory index.
class StorageBackend {
 public:
  virtual ~StorageBackend() = default;

  // Every persisted record, any order.
  virtual std::vector<ReactionRecord> load() = 0;
  // All-or-nothing. Throws Error(kStorage).
  virtual void append(std::span<const ReactionRecord> records) = 0;
  virtual std::size_t erase_member(const std::string& board_id, const std::string& member_id) = 0;
  // Largest record_id ever appended, including purged ones, so ids are never
  // reissued after an erasure. Empty when the backend does not outlive the process.
  virtual std::optional<std::string> max_record_id() { return std::nullopt; }
};

class MemoryBackend final : public StorageBackend {
 public:
  std::vector<ReactionRecord> load() override { return records_; }
  void append(std::span<const ReactionRecord> records) override;
  std::size_t erase_member(const std::string& board_id, const std::string& member_id) override;

 private:
  std::vector<ReactionRecord> records_;
};

// Single-file SQLite database. The file is created on first use.
class SqliteBackend final : public StorageBackend {
 public:
  explicit SqliteBackend(const std::string& path);
  ~SqliteBackend() override;

  SqliteBackend(const SqliteBackend&) = delete;
  SqliteBackend& operator=(const SqliteBackend&) = delete;

  std::vector<ReactionRecord> load() override;
  void append(std::span<const ReactionRecord> records) override;
  std::size_t erase_member(const std::string& board_id, const std::string& member_id) override;
  std::optional<std::string> max_record_id() override;

  const std::string& path() const { return path_; }

 private:
  void exec(const char* sql);

  std::string path_;
  sqlite3* db_ = nullptr;
};

}  // namespace emotrack
