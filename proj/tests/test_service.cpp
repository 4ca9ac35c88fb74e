#include <doctest.h>

#include <httplib.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <filesystem>
#include <thread>

#include "emotrack/demo.hpp"
#include "emotrack/error.hpp"
#include "emotrack/http_server.hpp"
#include "emotrack/trello.hpp"
#include "support/counting_provider.hpp"
#include "support/fixtures.hpp"
#include "support/mock_trello.hpp"
#include "support/service_harness.hpp"

using namespace emotrack;
using testing::ServiceHarness;
using json = nlohmann::json;

namespace {

const std::string kReactions = "/v1/boards/b1/cards/c-login/reactions";
const std::string kSummary = "/v1/boards/b1/cards/c-login/summary";
const std::string kDashboard = "/v1/boards/b1/dashboard";

std::string error_code(const ApiResponse& res) { return json::parse(res.body).at("code"); }

std::string trello_signature(const std::string& secret, const std::string& content) {
  unsigned char mac[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  HMAC(EVP_sha1(), secret.data(), static_cast<int>(secret.size()),
       reinterpret_cast<const unsigned char*>(content.data()), content.size(), mac, &len);
  std::string out(4 * ((len + 2) / 3), '\0');
  EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), mac, static_cast<int>(len));
  return out;
}

class FailingBackend final : public StorageBackend {
 public:
  std::vector<ReactionRecord> load() override { return {}; }
  void append(std::span<const ReactionRecord>) override { throw Error(ErrorCode::kStorage, "/var/secret/path"); }
  std::size_t erase_member(const std::string&, const std::string&) override { return 0; }
};

}  // namespace

TEST_CASE("POST reactions stores a batch and confirms it") {
  ServiceHarness h(testing::contract_roster());
  const auto res = h.call("POST", kReactions, h.token("bob", "b1"), R"({"ratings": {"anxiety": 4, "fear": 3}})");
  CHECK(res.status == 201);
  CHECK(res.content_type == "application/json");
  const auto body = ServiceHarness::body_of(res);
  CHECK(body["confirmation"]["saved"] == 2);
  CHECK(body["confirmation"]["message"] == "Saved 2 reactions.");
  REQUIRE(body["records"].size() == 2);
  CHECK(body["records"][0]["emotion"] == "fear");
  CHECK(body["records"][0]["stage_name"] == "Doing");
  CHECK(body["records"][0]["member_id"] == "bob");
  CHECK(body["records"][0]["captured_at"] == "2021-03-02T10:15:00.000Z");
  CHECK(h.store->size() == 2);

  const auto one = h.call("POST", kReactions, h.token("bob", "b1"), R"({"ratings": {"desire": 7}})");
  CHECK(ServiceHarness::body_of(one)["confirmation"]["message"] == "Saved 1 reaction.");
}

TEST_CASE("POST reactions validation") {
  ServiceHarness h(testing::contract_roster());
  const auto tok = h.token("bob", "b1");
  struct Case {
    std::string body;
    int status;
    std::string code;
  };
  const Case cases[] = {
      {R"({"ratings": {"anger": 9}})", 422, "invalid_rating"},
      {R"({"ratings": {"anger": 0}})", 422, "invalid_rating"},
      {R"({"ratings": {"anger": -3}})", 422, "invalid_rating"},
      {R"({"ratings": {"anger": 4.5}})", 422, "invalid_rating"},
      {R"({"ratings": {"anger": "4"}})", 422, "invalid_rating"},
      {R"({"ratings": {"boredom": 4}})", 422, "invalid_rating"},
      {R"({"ratings": {}})", 422, "invalid_rating"},
      {R"({"ratings": [4]})", 422, "invalid_rating"},
      {R"({"rating": {"anger": 4}})", 422, "invalid_rating"},
      {R"({"ratings": {"anger": 18446744073709551615}})", 422, "invalid_rating"},
      {R"(not json)", 400, "bad_request"},
      {R"([1, 2])", 400, "bad_request"},
      {R"({"ratings": {"fear": 3, "anger": 8}})", 422, "invalid_rating"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.body);
    const auto res = h.call("POST", kReactions, tok, c.body);
    CHECK(res.status == c.status);
    CHECK(error_code(res) == c.code);
  }
  CHECK(h.store->size() == 0);

  const auto unknown = h.call("POST", "/v1/boards/b1/cards/nope/reactions", tok, R"({"ratings": {"fear": 3}})");
  CHECK(unknown.status == 404);
  CHECK(error_code(unknown) == "unknown_card");
}

TEST_CASE("authentication failures") {
  ServiceHarness h(testing::contract_roster());
  const std::string body = R"({"ratings": {"fear": 3}})";

  CHECK(h.call("POST", kReactions, "", body).status == 401);
  CHECK(h.call("POST", kReactions, "garbage", body).status == 401);
  CHECK(h.call("POST", kReactions, h.token("bob", "b1", -1), body).status == 401);
  const auto forged = sign_token({"bob", "b1", h.clock.now(), Timestamp{h.clock.now().ms + 60000}}, "wrong");
  const auto res = h.call("POST", kReactions, forged, body);
  CHECK(res.status == 401);
  CHECK(error_code(res) == "unauthorized");

  auto basic = h.call("GET", kSummary, "", "", {}, {{"authorization", "Basic Ym9iOmJvYg=="}});
  CHECK(basic.status == 401);

  // Tokens in the query string are not accepted.
  CHECK(h.call("GET", kSummary, "", "", {{"access_token", h.token("bob", "b1")}}).status == 401);

  const auto wrong_board = h.call("POST", kReactions, h.token("bob", "other"), body);
  CHECK(wrong_board.status == 403);
  CHECK(error_code(wrong_board) == "wrong_board");
  CHECK(h.store->size() == 0);
}

TEST_CASE("error bodies have a fixed shape") {
  ServiceHarness h(testing::contract_roster());
  for (const auto& res : {h.call("GET", "/nowhere"), h.call("POST", kSummary, h.token("bob", "b1")),
                          h.call("GET", kSummary)}) {
    const auto body = ServiceHarness::body_of(res);
    CHECK(body.size() == 3);
    CHECK(body["status"] == res.status);
    CHECK(body["code"].is_string());
    CHECK(body["message"].is_string());
  }
  CHECK(h.call("GET", "/nowhere").status == 404);
  CHECK(h.call("POST", kSummary, h.token("bob", "b1")).status == 405);
  CHECK(error_code(h.call("DELETE", kReactions, h.token("bob", "b1"))) == "method_not_allowed");
}

TEST_CASE("summary is aggregate-only for every role") {
  ServiceHarness h(testing::contract_roster());
  h.call("POST", kReactions, h.token("bob", "b1"), R"({"ratings": {"anxiety": 4}})");
  h.call("POST", kReactions, h.token("carol", "b1"), R"({"ratings": {"anxiety": 2}})");
  h.call("POST", kReactions, h.token("dave", "b1"), R"({"ratings": {"anxiety": 6}})");

  const auto as_member = h.call("GET", kSummary, h.token("bob", "b1"));
  REQUIRE(as_member.status == 200);
  const auto body = ServiceHarness::body_of(as_member);
  CHECK(body["respondent_count"] == 3);
  CHECK(body["title"] == "Login page");
  CHECK(body["stage"]["name"] == "Doing");
  const auto& anxiety = body["emotions"][index_of(EmotionKind::kAnxiety)];
  CHECK(anxiety["emotion"] == "anxiety");
  CHECK(anxiety["mean"] == 4.0);
  CHECK(anxiety["min"] == 2);
  CHECK(anxiety["max"] == 6);
  CHECK(body["sentiment"] == -4.0);
  for (const char* peer : {"carol", "dave"}) CHECK(as_member.body.find(peer) == std::string::npos);

  const auto as_manager = h.call("GET", kSummary, h.token("alice", "b1"));
  CHECK(as_manager.body == as_member.body);
}

TEST_CASE("raw reactions are redacted for members") {
  ServiceHarness h(testing::contract_roster());
  h.call("POST", kReactions, h.token("bob", "b1"), R"({"ratings": {"anxiety": 4, "fear": 1}})");
  h.call("POST", kReactions, h.token("carol", "b1"), R"({"ratings": {"anxiety": 2}})");

  const auto mine = ServiceHarness::body_of(h.call("GET", kReactions, h.token("bob", "b1")));
  CHECK(mine["records"].size() == 2);
  const auto all = ServiceHarness::body_of(h.call("GET", kReactions, h.token("alice", "b1")));
  CHECK(all["records"].size() == 3);

  const auto me = h.call("GET", "/v1/boards/b1/members/me/reactions", h.token("carol", "b1"));
  CHECK(me.status == 200);
  const auto me_body = ServiceHarness::body_of(me);
  REQUIRE(me_body["records"].size() == 1);
  CHECK(me_body["records"][0]["member_id"] == "carol");
  CHECK(me.body.find("bob") == std::string::npos);
}

TEST_CASE("dashboard access and query validation") {
  ServiceHarness h(testing::contract_roster());
  h.call("POST", kReactions, h.token("bob", "b1"), R"({"ratings": {"anxiety": 4}})");

  const auto member = h.call("GET", kDashboard, h.token("bob", "b1"));
  CHECK(member.status == 403);
  CHECK(error_code(member) == "not_manager");

  const auto admin = h.token("alice", "b1");
  CHECK(h.call("GET", kDashboard, admin).status == 200);

  const std::multimap<std::string, std::string> bad[] = {
      {{"granularity", "fortnight"}},
      {{"granularity", "day"}, {"granularity", "hour"}},
      {{"emotion", "boredom"}},
      {{"from", "yesterday"}},
      {{"from", "2021-03-02T00:00:00Z"}, {"to", "2021-03-01T00:00:00Z"}},
      {{"from", "2021-03-02T00:00:00Z"}, {"to", "2021-03-02T00:00:00Z"}},
  };
  for (const auto& q : bad) {
    const auto res = h.call("GET", kDashboard, admin, "", q);
    CHECK(res.status == 422);
    CHECK(error_code(res) == "bad_query");
  }
}

TEST_CASE("dashboard filters and layout") {
  ServiceHarness h(testing::contract_roster());
  h.call("POST", kReactions, h.token("bob", "b1"), R"({"ratings": {"anxiety": 4, "happiness": 6}})");
  h.clock.advance_ms(3600000);
  h.call("POST", "/v1/boards/b1/cards/c-search/reactions", h.token("carol", "b1"), R"({"ratings": {"anxiety": 2}})");

  const auto admin = h.token("alice", "b1");
  auto body = ServiceHarness::body_of(h.call("GET", kDashboard, admin, "", {{"granularity", "hour"}}));
  CHECK(body["board_id"] == "b1");
  CHECK(body["series"]["granularity"] == "hour");
  CHECK(body["series"]["buckets"].size() == 2);
  CHECK(body["series"]["emotions"].size() == kEmotionCount);
  CHECK(body["cards"].size() == 2);
  CHECK(body["stages"].size() == 2);
  CHECK(body["summary"]["respondent_count"] == 2);

  body = ServiceHarness::body_of(
      h.call("GET", kDashboard, admin, "", {{"emotion", "anxiety,fear"}, {"card", "c-login"}}));
  CHECK(body["series"]["emotions"] == json::array({"fear", "anxiety"}));
  CHECK(body["series"]["scope"]["card_id"] == "c-login");
  CHECK(body["cards"].size() == 1);

  body = ServiceHarness::body_of(h.call("GET", kDashboard, admin, "", {{"member", "carol"}}));
  CHECK(body["summary"]["respondent_count"] == 1);

  body = ServiceHarness::body_of(h.call("GET", kDashboard, admin, "", {{"stage", "l-todo"}}));
  CHECK(body["stages"].size() == 1);
  CHECK(body["stages"][0]["stage_name"] == "To Do");

  body = ServiceHarness::body_of(h.call("GET", kDashboard, admin, "",
                                        {{"from", "2021-03-02T11:00:00Z"}, {"to", "2021-03-03T00:00:00Z"}}));
  CHECK(body["summary"]["respondent_count"] == 1);
}

TEST_CASE("demo data shows the anxiety peak on the capture day") {
  ServiceHarness h(demo::roster_document());
  demo::seed(*h.store, *h.roster, h.clock.now());
  const std::string board(demo::kBoardId);
  const std::string path = "/v1/boards/" + board + "/cards/" + std::string(demo::kCardId);
  const auto res = h.call("POST", path + "/reactions", h.token(std::string(demo::kMemberId), board),
                          R"({"ratings": {"anxiety": 4, "fear": 3}})");
  REQUIRE(res.status == 201);

  const auto dash = ServiceHarness::body_of(
      h.call("GET", "/v1/boards/" + board + "/dashboard", h.token(std::string(demo::kManagerId), board), "",
             {{"granularity", "day"}}));
  bool found = false;
  for (const auto& p : dash["peaks"]) {
    if (p["emotion"] == "anxiety" && p["bucket_start"] == "2021-03-02T00:00:00.000Z") found = true;
  }
  CHECK(found);
}

TEST_CASE("schema endpoint") {
  ServiceHarness h(testing::contract_roster());
  CHECK(h.call("GET", "/v1/schema").status == 401);
  const auto res = h.call("GET", "/v1/schema", h.token("bob", "elsewhere"));
  REQUIRE(res.status == 200);
  const auto body = ServiceHarness::body_of(res);
  CHECK(body["emotions"].size() == 8);
  CHECK(body["scale"]["min"] == 1);
  CHECK(body["scale"]["max"] == 7);
}

TEST_CASE("healthz") {
  ServiceHarness h(testing::contract_roster());
  const auto res = h.call("GET", "/healthz");
  CHECK(res.status == 200);
  CHECK(res.body == "ok");
}

TEST_CASE("CORS only for configured origins") {
  ServiceConfig cfg;
  cfg.cors_origins = {"https://ui.example"};
  ServiceHarness h(testing::contract_roster(), nullptr, cfg);

  auto res = h.call("GET", kSummary, h.token("bob", "b1"), "", {}, {{"origin", "https://ui.example"}});
  CHECK(res.headers["Access-Control-Allow-Origin"] == "https://ui.example");
  res = h.call("GET", kSummary, h.token("bob", "b1"), "", {}, {{"origin", "https://evil.example"}});
  CHECK_FALSE(res.headers.contains("Access-Control-Allow-Origin"));

  res = h.call("OPTIONS", kReactions, "", "", {}, {{"origin", "https://ui.example"}});
  CHECK(res.status == 204);
  CHECK(res.headers["Access-Control-Allow-Headers"].find("Authorization") != std::string::npos);
  CHECK(res.headers["Access-Control-Allow-Methods"].find("POST") != std::string::npos);
}

TEST_CASE("provider and storage failures map to 503 without internals") {
  auto roster = LocalRoster::load(testing::contract_roster());
  testing::CountingProvider provider(*roster);
  ReactionStore store;
  testing::FakeClock clock;
  ServiceConfig cfg;
  cfg.token_secret = testing::kTestSecret;
  Service service(cfg, store, provider, clock.clock());
  ApiRequest req{"POST", kReactions, {}, {}, R"({"ratings": {"fear": 3}})"};
  req.headers["authorization"] =
      "Bearer " + sign_token({"bob", "b1", clock.now(), Timestamp{clock.now().ms + 60000}}, testing::kTestSecret);

  provider.set_down(true);
  auto res = service.handle(req);
  CHECK(res.status == 503);
  CHECK(error_code(res) == "provider_unavailable");

  // Role lookup fails closed.
  req.method = "GET";
  req.path = kDashboard;
  req.body.clear();
  req.headers["authorization"] =
      "Bearer " + sign_token({"alice", "b1", clock.now(), Timestamp{clock.now().ms + 60000}}, testing::kTestSecret);
  res = service.handle(req);
  CHECK(res.status == 403);
  provider.set_down(false);
  CHECK(service.handle(req).status == 200);

  ServiceHarness failing(testing::contract_roster(), std::make_unique<ReactionStore>(std::make_unique<FailingBackend>()));
  res = failing.call("POST", kReactions, failing.token("bob", "b1"), R"({"ratings": {"fear": 3}})");
  CHECK(res.status == 503);
  CHECK(error_code(res) == "storage_unavailable");
  CHECK(res.body.find("/var/secret") == std::string::npos);
}

TEST_CASE("stage snapshot through the API") {
  ServiceHarness h(testing::contract_roster());
  h.call("POST", kReactions, h.token("bob", "b1"), R"({"ratings": {"fear": 3}})");
  h.roster->move_card("c-login", "l-done");
  h.call("POST", kReactions, h.token("bob", "b1"), R"({"ratings": {"fear": 5}})");
  const auto body = ServiceHarness::body_of(h.call("GET", kReactions, h.token("alice", "b1")));
  REQUIRE(body["records"].size() == 2);
  CHECK(body["records"][0]["stage_name"] == "Doing");
  CHECK(body["records"][1]["stage_name"] == "Done");
  CHECK(ServiceHarness::body_of(h.call("GET", kSummary, h.token("bob", "b1")))["stage"]["name"] == "Done");
}

TEST_CASE("trello webhook endpoint") {
  testing::MockTrello mock(testing::contract_roster());
  testing::FakeClock clock;
  TrelloConfig tc;
  tc.base_url = mock.base_url();
  tc.api_key = testing::MockTrello::kApiKey;
  tc.api_token = testing::MockTrello::kApiToken;
  TrelloAdapter adapter(tc, std::make_shared<HttplibTransport>(mock.base_url()), clock.clock());
  ReactionStore store;
  ServiceConfig cfg;
  cfg.token_secret = testing::kTestSecret;
  cfg.webhook_secret = "hook-secret";
  cfg.webhook_callback_url = "https://emotrack.example/v1/webhooks/trello";
  Service service(cfg, store, adapter, clock.clock(), &adapter);

  CHECK(adapter.get_stage("c-login").name == "Doing");
  mock.move_card("c-login", "l-done");
  mock.reset_count();

  const std::string event =
      R"({"action": {"type": "updateCard", "data": {"board": {"id": "b1"}, "card": {"id": "c-login"},)"
      R"( "listAfter": {"id": "l-done", "name": "Done"}}}})";
  ApiRequest req{"POST", "/v1/webhooks/trello", {}, {}, event};
  req.headers["x-trello-webhook"] = "bm9wZQ==";
  CHECK(service.handle(req).status == 401);
  CHECK(adapter.get_stage("c-login").name == "Doing");

  req.headers["x-trello-webhook"] = trello_signature(cfg.webhook_secret, event + cfg.webhook_callback_url);
  const auto res = service.handle(req);
  CHECK(res.status == 200);
  CHECK(json::parse(res.body)["outcome"] == "stage_updated");
  CHECK(adapter.get_stage("c-login").name == "Done");
  CHECK(mock.request_count() == 0);

  CHECK(service.handle(ApiRequest{"HEAD", "/v1/webhooks/trello", {}, {}, ""}).status == 200);

  // No adapter wired in: the endpoint does not exist.
  ServiceHarness h(testing::contract_roster());
  CHECK(h.call("POST", "/v1/webhooks/trello", "", event).status == 404);
}

TEST_CASE("restart against the same database serves identical responses") {
  const auto path = std::filesystem::temp_directory_path() /
                    ("emotrack-restart-" + std::to_string(::getpid()) + ".db");
  std::filesystem::remove(path);
  std::vector<std::string> before;
  auto snapshot = [](ServiceHarness& h) {
    return std::vector<std::string>{
        h.call("GET", kReactions, h.token("alice", "b1")).body,
        h.call("GET", kSummary, h.token("bob", "b1")).body,
        h.call("GET", kDashboard, h.token("alice", "b1")).body,
    };
  };
  {
    ServiceHarness h(testing::contract_roster(),
                     std::make_unique<ReactionStore>(std::make_unique<SqliteBackend>(path.string())));
    h.call("POST", kReactions, h.token("bob", "b1"), R"({"ratings": {"fear": 3, "anxiety": 4}})");
    h.clock.advance_ms(86400000);
    h.call("POST", kReactions, h.token("carol", "b1"), R"({"ratings": {"happiness": 5}})");
    before = snapshot(h);
  }
  {
    ServiceHarness h(testing::contract_roster(),
                     std::make_unique<ReactionStore>(std::make_unique<SqliteBackend>(path.string())));
    h.clock.advance_ms(86400000);
    CHECK(snapshot(h) == before);
  }
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + "-wal");
  std::filesystem::remove(path.string() + "-shm");
}

TEST_CASE("HTTP front end") {
  ServiceConfig cfg;
  cfg.cors_origins = {"https://ui.example"};
  ServiceHarness h(testing::contract_roster(), nullptr, cfg);
  HttpServer server(*h.service);
  const int port = server.bind_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->body == "ok");

  httplib::Headers auth = {{"Authorization", "Bearer " + h.token("bob", "b1")}, {"Origin", "https://ui.example"}};
  auto posted = client.Post(kReactions, auth, R"({"ratings": {"fear": 3}})", "application/json");
  REQUIRE(posted);
  CHECK(posted->status == 201);
  CHECK(posted->get_header_value("Content-Type").find("application/json") != std::string::npos);
  CHECK(posted->get_header_value("Access-Control-Allow-Origin") == "https://ui.example");

  auto summary = client.Get("/v1/boards/b1/cards/c-login/summary?granularity=day", auth);
  REQUIRE(summary);
  CHECK(summary->status == 200);

  auto dash = client.Get("/v1/boards/b1/dashboard?emotion=fear&emotion=anger", {{"Authorization", "Bearer " + h.token("alice", "b1")}});
  REQUIRE(dash);
  CHECK(dash->status == 200);
  CHECK(json::parse(dash->body)["series"]["emotions"] == json::array({"anger", "fear"}));

  auto missing = client.Get("/does/not/exist");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(json::parse(missing->body)["code"] == "not_found");

  auto options = client.Options(kReactions, {{"Origin", "https://ui.example"}});
  REQUIRE(options);
  CHECK(options->status == 204);

  server.stop();
  th.join();
}
