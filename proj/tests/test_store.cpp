#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>
#include <thread>

#include "emotrack/analytics.hpp"
#include "emotrack/error.hpp"
#include "emotrack/local_roster.hpp"
#include "emotrack/store.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace emotrack;

namespace {

const Timestamp kNow{1614680100000};  // 2021-03-02T10:15:00Z

ReactionBatch kashumi_batch() {
  return ReactionBatch{"b1", "c-login", "kashumi",
                       {{EmotionKind::kAnxiety, 4}, {EmotionKind::kFear, 3}}};
}

nlohmann::json roster_with_kashumi() {
  auto doc = testing::contract_roster();
  doc["boards"][0]["members"].push_back({{"id", "kashumi"}, {"name", "Kashumi"}});
  return doc;
}

std::string export_string(const ReactionStore& store, ExportFormat f, const ReactionFilter& filter = {}) {
  std::ostringstream out;
  store.export_records(filter, f, out);
  return out.str();
}

class FailingBackend final : public StorageBackend {
 public:
  std::vector<ReactionRecord> load() override { return {}; }
  void append(std::span<const ReactionRecord>) override {
    throw Error(ErrorCode::kStorage, "disk full");
  }
  std::size_t erase_member(const std::string&, const std::string&) override { return 0; }
};

std::filesystem::path temp_db(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("emotrack-test-" + name + "-" +
                                                     std::to_string(::getpid()) + ".db");
  std::filesystem::remove(p);
  std::filesystem::remove(p.string() + "-wal");
  std::filesystem::remove(p.string() + "-shm");
  return p;
}

}  // namespace

TEST_CASE("append_batch creates one record per rating with shared time and stage") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store;
  const auto records = store.append_batch(kashumi_batch(), kNow, *roster);
  REQUIRE(records.size() == 2);
  // canonical order: fear before anxiety
  CHECK(records[0].emotion == EmotionKind::kFear);
  CHECK(records[0].intensity.value() == 3);
  CHECK(records[1].emotion == EmotionKind::kAnxiety);
  CHECK(records[1].intensity.value() == 4);
  for (const auto& r : records) {
    CHECK(r.captured_at == kNow);
    CHECK(r.stage == Stage{"l-doing", "Doing"});
    CHECK(r.board_id == "b1");
    CHECK(r.member_id == "kashumi");
    CHECK(r.schema_version == 1);
  }
  CHECK(records[0].record_id != records[1].record_id);
  CHECK(store.query({}) == records);
}

TEST_CASE("append_batch rejects bad batches before storage") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store;

  ReactionBatch empty{"b1", "c-login", "kashumi", {}};
  CHECK_THROWS_AS(store.append_batch(empty, kNow, *roster), Error);

  ReactionBatch bad{"b1", "c-login", "kashumi", {{EmotionKind::kFear, 3}, {EmotionKind::kAnger, 9}}};
  try {
    store.append_batch(bad, kNow, *roster);
    FAIL("expected invalid rating");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidRating);
  }

  ReactionBatch unknown{"b1", "nope", "kashumi", {{EmotionKind::kFear, 3}}};
  try {
    store.append_batch(unknown, kNow, *roster);
    FAIL("expected unknown card");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownCard);
  }

  ReactionBatch wrong_board{"other", "c-login", "kashumi", {{EmotionKind::kFear, 3}}};
  CHECK_THROWS_AS(store.append_batch(wrong_board, kNow, *roster), Error);
  CHECK(store.size() == 0);
}

TEST_CASE("stage snapshot is never rewritten when the card moves") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store;
  store.append_batch(kashumi_batch(), kNow, *roster);
  roster->move_card("c-login", "l-done");
  store.append_batch({"b1", "c-login", "kashumi", {{EmotionKind::kRelaxation, 5}}},
                     Timestamp{kNow.ms + 1000}, *roster);
  const auto all = store.query({});
  REQUIRE(all.size() == 3);
  CHECK(all[0].stage.name == "Doing");
  CHECK(all[1].stage.name == "Doing");
  CHECK(all[2].stage.name == "Done");
}

TEST_CASE("captured_at never decreases for a single writer") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store;
  store.append_batch(kashumi_batch(), kNow, *roster);
  auto second = store.append_batch({"b1", "c-login", "bob", {{EmotionKind::kAnger, 2}}},
                                   Timestamp{kNow.ms - 5000}, *roster);
  CHECK(second[0].captured_at == kNow);
  const auto all = store.query({});
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].captured_at <= all[i].captured_at);
}

TEST_CASE("query examples") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store;
  ReactionFilter by_card;
  by_card.card_id = "X";
  CHECK(store.query(by_card).empty());

  store.append_batch(kashumi_batch(), kNow, *roster);
  ReactionFilter fear;
  fear.emotions = std::set<EmotionKind>{EmotionKind::kFear};
  const auto got = store.query(fear);
  REQUIRE(got.size() == 1);
  CHECK(got[0].intensity.value() == 3);

  ReactionFilter bad;
  bad.from = kNow;
  bad.to = kNow;
  CHECK_THROWS_AS(store.query(bad), Error);
}

TEST_CASE("query matches a linear-scan oracle on random stores") {
  std::mt19937_64 rng(20210302);
  for (int iter = 0; iter < 200; ++iter) {
    const auto n = static_cast<std::size_t>(rng() % 101);
    auto records = oracle::random_records(rng, n);
    ReactionStore store;
    store.restore(records);

    ReactionFilter f;
    if (rng() % 2) f.board_id = "board" + std::to_string(rng() % 2);
    if (rng() % 3 == 0) f.card_id = "b0card" + std::to_string(rng() % 5);
    if (rng() % 3 == 0) f.member_id = "member" + std::to_string(rng() % 6);
    if (rng() % 3 == 0) {
      std::set<EmotionKind> ks;
      for (EmotionKind k : kAllEmotions) {
        if (rng() % 2) ks.insert(k);
      }
      f.emotions = ks;
    }
    if (rng() % 3 == 0) {
      const std::int64_t a = 1614556800000 + static_cast<std::int64_t>(rng() % (10ULL * 86400000));
      f.from = Timestamp{a};
      f.to = Timestamp{a + 1 + static_cast<std::int64_t>(rng() % (3ULL * 86400000))};
    }
    if (rng() % 4 == 0) f.stage_ids = std::set<std::string>{"stage" + std::to_string(rng() % 4)};

    CHECK(store.query(f) == oracle::query(records, f));
  }
}

TEST_CASE("latest_per_member keeps the newest value per member and emotion") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store;
  store.append_batch({"b1", "c-login", "kashumi", {{EmotionKind::kAnxiety, 4}}}, kNow, *roster);
  store.append_batch({"b1", "c-login", "kashumi", {{EmotionKind::kAnxiety, 2}}},
                     Timestamp{kNow.ms + 60000}, *roster);
  const auto latest = store.latest_per_member("c-login");
  REQUIRE(latest.size() == 1);
  CHECK(latest.at({"kashumi", EmotionKind::kAnxiety}).intensity.value() == 2);
  CHECK(store.query({}).size() == 2);  // history kept
}

TEST_CASE("latest_per_member on a single record") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store;
  auto created = store.append_batch({"b1", "c-login", "bob", {{EmotionKind::kSadness, 6}}}, kNow, *roster);
  const auto latest = store.latest_per_member("c-login");
  REQUIRE(latest.size() == 1);
  CHECK(latest.begin()->second == created[0]);
}

TEST_CASE("latest_per_member matches a grouping oracle") {
  std::mt19937_64 rng(7);
  oracle::StoreShape shape;
  shape.boards = 1;
  shape.cards = 1;
  for (int iter = 0; iter < 200; ++iter) {
    auto records = oracle::random_records(rng, static_cast<std::size_t>(rng() % 51), shape);
    ReactionStore store;
    store.restore(records);
    const auto got = store.latest_per_member("b0card0");
    const auto want = oracle::latest(records);
    CHECK(got == want);
  }
}

TEST_CASE("export formats") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store;
  CHECK(export_string(store, ExportFormat::kCsv) == std::string(kExportHeader) + "\n");
  CHECK(export_string(store, ExportFormat::kJsonl).empty());

  const auto created = store.append_batch(kashumi_batch(), kNow, *roster);
  const std::string jsonl = export_string(store, ExportFormat::kJsonl);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);
  CHECK(oracle::read_jsonl(jsonl) == created);

  const std::string csv = export_string(store, ExportFormat::kCsv);
  CHECK(csv.find("r0000000000000001,b1,c-login,kashumi,fear,3,2021-03-02T10:15:00.000Z,l-doing,Doing,1\n") !=
        std::string::npos);
  CHECK(oracle::read_csv(csv) == created);
}

TEST_CASE("export -> re-import -> export is byte-identical") {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 50; ++iter) {
    auto records = oracle::random_records(rng, static_cast<std::size_t>(rng() % 120));
    ReactionStore store;
    store.restore(records);
    for (auto fmt : {ExportFormat::kCsv, ExportFormat::kJsonl}) {
      const std::string first = export_string(store, fmt);
      const auto reread = fmt == ExportFormat::kCsv ? oracle::read_csv(first) : oracle::read_jsonl(first);
      ReactionStore copy;
      copy.restore(reread);
      CHECK(copy.query({}) == store.query({}));
      CHECK(export_string(copy, fmt) == first);
      CHECK(export_string(store, fmt) == first);  // deterministic
    }
  }
}

TEST_CASE("purge_member") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store;
  CHECK(store.purge_member("b1", "ghost") == 0);
  store.append_batch(kashumi_batch(), kNow, *roster);
  store.append_batch({"b1", "c-login", "bob", {{EmotionKind::kAnger, 2}}}, kNow, *roster);
  CHECK(store.purge_member("b1", "kashumi") == 2);
  ReactionFilter f;
  f.member_id = "kashumi";
  CHECK(store.query(f).empty());
  CHECK(store.size() == 1);
}

TEST_CASE("purge then aggregate equals a store that never had the member") {
  std::mt19937_64 rng(4242);
  for (int iter = 0; iter < 100; ++iter) {
    auto records = oracle::random_records(rng, static_cast<std::size_t>(rng() % 150));
    const std::string victim = "member" + std::to_string(rng() % 6);
    const std::string board = "board" + std::to_string(rng() % 2);

    ReactionStore store;
    store.restore(records);
    std::size_t expected_removed = 0;
    std::vector<ReactionRecord> kept;
    for (const auto& r : records) {
      if (r.member_id == victim && r.board_id == board) {
        ++expected_removed;
      } else {
        kept.push_back(r);
      }
    }
    CHECK(store.purge_member(board, victim) == expected_removed);

    ReactionStore rebuilt;
    rebuilt.restore(kept);
    const auto a = store.query({});
    const auto b = rebuilt.query({});
    CHECK(a == b);
    for (int c = 0; c < 5; ++c) {
      const std::string card = "b0card" + std::to_string(c);
      CHECK(card_summary(card, a) == card_summary(card, b));
    }
  }
}

TEST_CASE("append is all-or-nothing when the backend fails") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store(std::make_unique<FailingBackend>());
  try {
    store.append_batch(kashumi_batch(), kNow, *roster);
    FAIL("expected storage failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kStorage);
  }
  CHECK(store.size() == 0);
}

TEST_CASE("a card accumulates 1000 records without truncation") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store;
  std::int64_t sum = 0;
  for (int i = 0; i < 1000; ++i) {
    const int v = 1 + i % 7;
    sum += v;
    store.append_batch({"b1", "c-login", "member" + std::to_string(i), {{EmotionKind::kAnxiety, v}}},
                       Timestamp{kNow.ms + i}, *roster);
  }
  ReactionFilter f;
  f.card_id = "c-login";
  const auto all = store.query(f);
  CHECK(all.size() == 1000);
  const auto s = card_summary("c-login", all);
  CHECK(s.row(EmotionKind::kAnxiety).count == 1000);
  CHECK(*s.row(EmotionKind::kAnxiety).mean == Rational(sum, 1000));
}

TEST_CASE("restore rejects duplicate ids") {
  std::mt19937_64 rng(1);
  auto records = oracle::random_records(rng, 3);
  ReactionStore store;
  store.restore(records);
  CHECK_THROWS_AS(store.restore({records[0]}), Error);
  CHECK(store.size() == 3);
}

TEST_CASE("append-only: non-purge operations never shrink the store") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store;
  std::vector<ReactionRecord> before;
  for (int i = 0; i < 20; ++i) {
    store.append_batch({"b1", i % 2 ? "c-login" : "c-search", "m" + std::to_string(i % 3),
                        {{kAllEmotions[static_cast<std::size_t>(i % 8)], 1 + i % 7}}},
                       Timestamp{kNow.ms + i * 1000}, *roster);
    const auto after = store.query({});
    for (const auto& r : before) CHECK(std::find(after.begin(), after.end(), r) != after.end());
    before = after;
  }
}

TEST_CASE("concurrent batches are atomic and all land") {
  auto roster = LocalRoster::load(roster_with_kashumi());
  ReactionStore store;
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        store.append_batch({"b1", "c-login", "m" + std::to_string(t),
                            {{EmotionKind::kAnger, 1}, {EmotionKind::kFear, 2}, {EmotionKind::kDesire, 3}}},
                           Timestamp{kNow.ms + i}, *roster);
        // A snapshot never shows a partial batch.
        CHECK(store.size() % 3 == 0);
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(store.size() == 8 * 50 * 3);
  const auto all = store.query({});
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(record_less(all[i - 1], all[i]));
}

TEST_CASE("sqlite backend persists across reopen") {
  const auto path = temp_db("persist");
  auto roster = LocalRoster::load(roster_with_kashumi());
  std::string before;
  {
    ReactionStore store(std::make_unique<SqliteBackend>(path.string()));
    store.append_batch(kashumi_batch(), kNow, *roster);
    store.append_batch({"b1", "c-search", "bob", {{EmotionKind::kHappiness, 6}}}, kNow, *roster);
    store.append_batch({"b1", "c-search", "carol", {{EmotionKind::kHappiness, 2}}}, kNow, *roster);
    CHECK(store.purge_member("b1", "carol") == 1);
    before = export_string(store, ExportFormat::kJsonl);
  }
  {
    ReactionStore store(std::make_unique<SqliteBackend>(path.string()));
    CHECK(store.size() == 3);
    CHECK(export_string(store, ExportFormat::kJsonl) == before);
    // ids continue after the highest persisted id
    auto more = store.append_batch({"b1", "c-login", "dave", {{EmotionKind::kAnger, 1}}}, kNow, *roster);
    CHECK(more[0].record_id == make_record_id(5));
  }
  std::filesystem::remove(path);
}

TEST_CASE("sqlite backend reports unopenable paths as storage errors") {
  try {
    SqliteBackend backend("/nonexistent-dir/emotrack.db");
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kStorage);
  }
}
