#include "emotrack/storage.hpp"

#include <sqlite3.h>

#include <algorithm>

#include "emotrack/error.hpp"

namespace emotrack {
namespace {

[[noreturn]] void fail(sqlite3* db, const std::string& what) {
  throw Error(ErrorCode::kStorage, what + ": " + (db ? sqlite3_errmsg(db) : "no database"));
}

// Finalizes on scope exit.
class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) fail(db, "prepare");
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  void bind(int idx, const std::string& text) {
    if (sqlite3_bind_text(stmt_, idx, text.data(), static_cast<int>(text.size()),
                          SQLITE_TRANSIENT) != SQLITE_OK) {
      fail(db_, "bind");
    }
  }
  void bind(int idx, std::int64_t v) {
    if (sqlite3_bind_int64(stmt_, idx, v) != SQLITE_OK) fail(db_, "bind");
  }
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail(db_, "step");
  }
  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }
  std::string text(int col) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
             : std::string();
  }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

}  // namespace

void MemoryBackend::append(std::span<const ReactionRecord> records) {
  records_.insert(records_.end(), records.begin(), records.end());
}

std::size_t MemoryBackend::erase_member(const std::string& board_id, const std::string& member_id) {
  return std::erase_if(records_, [&](const ReactionRecord& r) {
    return r.board_id == board_id && r.member_id == member_id;
  });
}

SqliteBackend::SqliteBackend(const std::string& path) : path_(path) {
  if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error(ErrorCode::kStorage, "cannot open '" + path + "': " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA journal_mode=WAL");
  exec(
      "CREATE TABLE IF NOT EXISTS reactions ("
      " record_id TEXT PRIMARY KEY,"
      " board_id TEXT NOT NULL,"
      " card_id TEXT NOT NULL,"
      " member_id TEXT NOT NULL,"
      " emotion TEXT NOT NULL,"
      " intensity INTEGER NOT NULL,"
      " captured_at_ms INTEGER NOT NULL,"
      " stage_id TEXT NOT NULL,"
      " stage_name TEXT NOT NULL,"
      " schema_version INTEGER NOT NULL)");
  exec("CREATE INDEX IF NOT EXISTS reactions_member ON reactions(board_id, member_id)");
  exec("CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT NOT NULL)");
}

SqliteBackend::~SqliteBackend() { sqlite3_close(db_); }

void SqliteBackend::exec(const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown";
    sqlite3_free(err);
    throw Error(ErrorCode::kStorage, "sqlite: " + msg);
  }
}

std::vector<ReactionRecord> SqliteBackend::load() {
  Statement st(db_,
               "SELECT record_id, board_id, card_id, member_id, emotion, intensity, captured_at_ms,"
               " stage_id, stage_name, schema_version FROM reactions");
  std::vector<ReactionRecord> out;
  while (st.step()) {
    ReactionRecord r;
    r.record_id = st.text(0);
    r.board_id = st.text(1);
    r.card_id = st.text(2);
    r.member_id = st.text(3);
    auto kind = parse_kind(st.text(4));
    auto intensity = Intensity::make(st.integer(5));
    if (!kind || !intensity) {
      throw Error(ErrorCode::kStorage, "corrupt row '" + r.record_id + "' in " + path_);
    }
    r.emotion = *kind;
    r.intensity = *intensity;
    r.captured_at = Timestamp{st.integer(6)};
    r.stage = {st.text(7), st.text(8)};
    r.schema_version = static_cast<int>(st.integer(9));
    out.push_back(std::move(r));
  }
  return out;
}

void SqliteBackend::append(std::span<const ReactionRecord> records) {
  exec("BEGIN IMMEDIATE");
  try {
    Statement st(db_,
                 "INSERT INTO reactions VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10)");
    for (const auto& r : records) {
      st.bind(1, r.record_id);
      st.bind(2, r.board_id);
      st.bind(3, r.card_id);
      st.bind(4, r.member_id);
      st.bind(5, std::string(to_string(r.emotion)));
      st.bind(6, static_cast<std::int64_t>(r.intensity.value()));
      st.bind(7, r.captured_at.ms);
      st.bind(8, r.stage.id);
      st.bind(9, r.stage.name);
      st.bind(10, static_cast<std::int64_t>(r.schema_version));
      st.step();
      st.reset();
    }
    if (!records.empty()) {
      const auto top = std::max_element(records.begin(), records.end(),
                                        [](const auto& a, const auto& b) { return a.record_id < b.record_id; });
      Statement meta(db_,
                     "INSERT INTO meta VALUES ('max_record_id', ?1)"
                     " ON CONFLICT(key) DO UPDATE SET value = max(value, excluded.value)");
      meta.bind(1, top->record_id);
      meta.step();
    }
  } catch (...) {
    sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    throw;
  }
  exec("COMMIT");
}

std::size_t SqliteBackend::erase_member(const std::string& board_id, const std::string& member_id) {
  Statement st(db_, "DELETE FROM reactions WHERE board_id = ?1 AND member_id = ?2");
  st.bind(1, board_id);
  st.bind(2, member_id);
  st.step();
  return static_cast<std::size_t>(sqlite3_changes(db_));
}

std::optional<std::string> SqliteBackend::max_record_id() {
  Statement st(db_, "SELECT value FROM meta WHERE key = 'max_record_id'");
  if (!st.step()) return std::nullopt;
  return st.text(0);
}

}  // namespace emotrack
