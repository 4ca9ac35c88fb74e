#include "emotrack/service.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "crypto.hpp"
#include "emotrack/analytics.hpp"
#include "emotrack/error.hpp"
#include "emotrack/local_roster.hpp"
#include "emotrack/log.hpp"

namespace emotrack {
namespace {

using json = nlohmann::json;

class ApiFailure : public std::exception {
 public:
  explicit ApiFailure(ApiError error) : error_(std::move(error)) {}
  const ApiError& error() const { return error_; }
  const char* what() const noexcept override { return error_.message.c_str(); }

 private:
  ApiError error_;
};

[[noreturn]] void fail(ApiErrorCode code, std::string message) {
  throw ApiFailure(ApiError{code, std::move(message)});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start < path.size()) {
    auto end = path.find('/', start);
    if (end == std::string::npos) end = path.size();
    if (end > start) parts.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::vector<std::string> query_values(const ApiRequest& req, const std::string& key) {
  std::vector<std::string> out;
  auto [lo, hi] = req.query.equal_range(key);
  for (auto it = lo; it != hi; ++it) {
    std::size_t start = 0;
    const auto& v = it->second;
    while (start <= v.size()) {
      auto end = v.find(',', start);
      if (end == std::string::npos) end = v.size();
      if (end > start) out.push_back(v.substr(start, end - start));
      start = end + 1;
    }
  }
  return out;
}

std::optional<std::string> single_query(const ApiRequest& req, const std::string& key) {
  auto values = query_values(req, key);
  if (values.empty()) return std::nullopt;
  if (values.size() > 1) fail(ApiErrorCode::kBadQuery, "parameter '" + key + "' given more than once");
  return values.front();
}

Timestamp query_time(const std::string& key, const std::string& value) {
  auto t = parse_rfc3339(value);
  if (!t) fail(ApiErrorCode::kBadQuery, "parameter '" + key + "' is not an RFC 3339 timestamp");
  return *t;
}

json records_json(const std::vector<ReactionRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) arr.push_back(json(to_json(r)));
  return arr;
}

ApiError from_error(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kInvalidRating:
    case ErrorCode::kUnknownKind:
      return {ApiErrorCode::kInvalidRating, e.what()};
    case ErrorCode::kInvalidArgument:
      return {ApiErrorCode::kBadQuery, e.what()};
    case ErrorCode::kUnknownCard:
      return {ApiErrorCode::kUnknownCard, e.what()};
    case ErrorCode::kNotFound:
      return {ApiErrorCode::kNotFound, e.what()};
    case ErrorCode::kMalformed:
      return {ApiErrorCode::kBadRequest, e.what()};
    case ErrorCode::kUpstream:
    case ErrorCode::kProviderUnavailable:
      return {ApiErrorCode::kProviderUnavailable, "board provider is unavailable"};
    case ErrorCode::kStorage:
    case ErrorCode::kIo:
      return {ApiErrorCode::kStorageUnavailable, "storage is unavailable"};
    case ErrorCode::kConfig:
      break;
  }
  return {ApiErrorCode::kInternal, "internal error"};
}

}  // namespace

std::optional<std::string> ApiRequest::header(std::string_view name) const {
  auto it = headers.find(std::string(name));
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

int ApiError::status() const noexcept {
  switch (code) {
    case ApiErrorCode::kBadRequest: return 400;
    case ApiErrorCode::kUnauthorized: return 401;
    case ApiErrorCode::kNotManager: return 403;
    case ApiErrorCode::kWrongBoard: return 403;
    case ApiErrorCode::kNotFound: return 404;
    case ApiErrorCode::kUnknownCard: return 404;
    case ApiErrorCode::kMethodNotAllowed: return 405;
    case ApiErrorCode::kInvalidRating: return 422;
    case ApiErrorCode::kBadQuery: return 422;
    case ApiErrorCode::kInternal: return 500;
    case ApiErrorCode::kProviderUnavailable: return 503;
    case ApiErrorCode::kStorageUnavailable: return 503;
  }
  return 500;
}

std::string_view ApiError::code_name() const noexcept {
  switch (code) {
    case ApiErrorCode::kBadRequest: return "bad_request";
    case ApiErrorCode::kUnauthorized: return "unauthorized";
    case ApiErrorCode::kNotManager: return "not_manager";
    case ApiErrorCode::kWrongBoard: return "wrong_board";
    case ApiErrorCode::kNotFound: return "not_found";
    case ApiErrorCode::kUnknownCard: return "unknown_card";
    case ApiErrorCode::kMethodNotAllowed: return "method_not_allowed";
    case ApiErrorCode::kInvalidRating: return "invalid_rating";
    case ApiErrorCode::kBadQuery: return "bad_query";
    case ApiErrorCode::kInternal: return "internal_error";
    case ApiErrorCode::kProviderUnavailable: return "provider_unavailable";
    case ApiErrorCode::kStorageUnavailable: return "storage_unavailable";
  }
  return "internal_error";
}

json ApiError::to_json() const {
  return {{"status", status()}, {"code", code_name()}, {"message", message}};
}

ApiResponse json_response(int status, const json& body) {
  ApiResponse res;
  res.status = status;
  res.body = body.dump(-1, ' ', false, json::error_handler_t::replace);
  return res;
}

ApiResponse error_response(const ApiError& error) {
  return json_response(error.status(), error.to_json());
}

Service::Service(ServiceConfig config, ReactionStore& store, BoardStateProvider& provider, Clock clock,
                 TrelloAdapter* webhook_target)
    : config_(std::move(config)),
      store_(store),
      provider_(provider),
      clock_(std::move(clock)),
      webhook_target_(webhook_target),
      roles_(provider, config_.role_cache_ttl, clock_),
      schema_(default_schema()) {}

ApiResponse Service::handle(const ApiRequest& request) {
  ApiResponse res;
  try {
    res = dispatch(request);
  } catch (const ApiFailure& f) {
    res = error_response(f.error());
  } catch (const Error& e) {
    const ApiError err = from_error(e);
    if (err.status() >= 500) log_error(std::string("request failed: ") + e.what());
    res = error_response(err);
  } catch (const std::exception& e) {
    log_error(std::string("unhandled exception: ") + e.what());
    res = error_response({ApiErrorCode::kInternal, "internal error"});
  }
  apply_cors(request, res);
  return res;
}

void Service::apply_cors(const ApiRequest& req, ApiResponse& res) const {
  auto origin = req.header("origin");
  if (!origin) return;
  const bool allowed = std::any_of(config_.cors_origins.begin(), config_.cors_origins.end(),
                                   [&](const std::string& o) { return o == "*" || o == *origin; });
  if (!allowed) return;
  res.headers["Access-Control-Allow-Origin"] = *origin;
  res.headers["Vary"] = "Origin";
  if (req.method == "OPTIONS") {
    res.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS";
    res.headers["Access-Control-Allow-Headers"] = "Authorization, Content-Type";
    res.headers["Access-Control-Max-Age"] = "600";
  }
}

ApiResponse Service::dispatch(const ApiRequest& req) {
  const auto parts = split_path(req.path);
  const std::string& m = req.method;

  if (m == "OPTIONS") {
    ApiResponse res;
    res.status = 204;
    res.content_type.clear();
    return res;
  }

  auto method_check = [&](std::initializer_list<std::string_view> allowed) {
    if (std::find(allowed.begin(), allowed.end(), m) == allowed.end()) {
      fail(ApiErrorCode::kMethodNotAllowed, "method " + m + " not allowed on " + req.path);
    }
  };

  if (parts.size() == 1 && parts[0] == "healthz") {
    method_check({"GET", "HEAD"});
    ApiResponse res;
    res.content_type = "text/plain";
    res.body = "ok";
    return res;
  }
  if (parts.empty() || parts[0] != "v1") fail(ApiErrorCode::kNotFound, "no such endpoint");

  if (parts.size() == 2 && parts[1] == "schema") {
    method_check({"GET"});
    verify_bearer(req);  // any board's token may read the schema
    return json_response(200, to_json(schema_));
  }

  if (parts.size() == 3 && parts[1] == "webhooks" && parts[2] == "trello") {
    method_check({"POST", "HEAD"});
    if (!webhook_target_) fail(ApiErrorCode::kNotFound, "webhooks are not enabled");
    if (m == "HEAD") return ApiResponse{200, "", "", {}};
    return post_webhook(req);
  }

  if (parts.size() >= 3 && parts[1] == "boards") {
    const std::string& board = parts[2];
    if (parts.size() == 6 && parts[3] == "cards" && parts[5] == "reactions") {
      method_check({"GET", "POST"});
      return m == "POST" ? post_reactions(req, board, parts[4]) : get_card_reactions(req, board, parts[4]);
    }
    if (parts.size() == 6 && parts[3] == "cards" && parts[5] == "summary") {
      method_check({"GET"});
      return get_summary(req, board, parts[4]);
    }
    if (parts.size() == 4 && parts[3] == "dashboard") {
      method_check({"GET"});
      return get_dashboard(req, board);
    }
    if (parts.size() == 6 && parts[3] == "members" && parts[4] == "me" && parts[5] == "reactions") {
      method_check({"GET"});
      return get_my_reactions(req, board);
    }
  }
  fail(ApiErrorCode::kNotFound, "no such endpoint");
}

Principal Service::verify_bearer(const ApiRequest& req) const {
  auto auth = req.header("authorization");
  if (!auth) fail(ApiErrorCode::kUnauthorized, "missing bearer token");
  constexpr std::string_view kScheme = "bearer ";
  if (auth->size() <= kScheme.size() ||
      !std::equal(kScheme.begin(), kScheme.end(), auth->begin(),
                  [](char a, char b) { return a == std::tolower(static_cast<unsigned char>(b)); })) {
    fail(ApiErrorCode::kUnauthorized, "authorization header is not a bearer token");
  }
  auto result = verify_token(std::string_view(*auth).substr(kScheme.size()), config_.token_secret, clock_());
  if (auto* rejection = std::get_if<TokenRejection>(&result)) {
    fail(ApiErrorCode::kUnauthorized, "token rejected: " + std::string(to_string(*rejection)));
  }
  return std::get<Principal>(std::move(result));
}

Principal Service::authenticate(const ApiRequest& req, const std::string& board_id) {
  Principal principal = verify_bearer(req);
  if (principal.board_id != board_id) fail(ApiErrorCode::kWrongBoard, "token is not valid for this board");
  return roles_.resolve(std::move(principal));
}

Card Service::resolve_card(const std::string& board_id, const std::string& card_id) {
  Card card;
  try {
    card = provider_.get_card(card_id);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotFound) fail(ApiErrorCode::kUnknownCard, "unknown card");
    throw;
  }
  if (card.board_id != board_id) fail(ApiErrorCode::kUnknownCard, "unknown card");
  return card;
}

ApiResponse Service::post_reactions(const ApiRequest& req, const std::string& board,
                                    const std::string& card) {
  const Principal principal = authenticate(req, board);

  const json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) fail(ApiErrorCode::kBadRequest, "body must be a JSON object");
  auto ratings = body.find("ratings");
  if (ratings == body.end() || !ratings->is_object()) {
    fail(ApiErrorCode::kInvalidRating, "body.ratings must be an object of emotion -> integer");
  }

  ReactionBatch batch{board, card, principal.member_id, {}};
  for (const auto& [name, value] : ratings->items()) {
    auto kind = parse_kind(name);
    if (!kind) fail(ApiErrorCode::kInvalidRating, "unknown emotion '" + name + "'");
    if (!value.is_number_integer()) {
      fail(ApiErrorCode::kInvalidRating, "rating for '" + name + "' must be an integer 1..7");
    }
    if (batch.ratings.contains(*kind)) fail(ApiErrorCode::kInvalidRating, "duplicate emotion '" + name + "'");
    batch.ratings[*kind] = value.is_number_unsigned()
                               ? static_cast<std::int64_t>(std::min<std::uint64_t>(value.get<std::uint64_t>(), INT64_MAX))
                               : value.get<std::int64_t>();
  }
  if (batch.ratings.empty()) fail(ApiErrorCode::kInvalidRating, "at least one rating is required");

  auto created = store_.append_batch(batch, clock_(), provider_);
  created = redact(std::move(created), principal);
  const std::size_t n = created.size();
  json confirmation = {{"saved", n},
                       {"message", "Saved " + std::to_string(n) + (n == 1 ? " reaction." : " reactions.")}};
  return json_response(201, {{"records", records_json(created)}, {"confirmation", confirmation}});
}

ApiResponse Service::get_card_reactions(const ApiRequest& req, const std::string& board,
                                        const std::string& card) {
  const Principal principal = authenticate(req, board);
  resolve_card(board, card);
  ReactionFilter f;
  f.board_id = board;
  f.card_id = card;
  auto records = redact(store_.query(f), principal);
  return json_response(200, {{"records", records_json(records)}});
}

ApiResponse Service::get_summary(const ApiRequest& req, const std::string& board, const std::string& card) {
  const Principal principal = authenticate(req, board);
  const Card c = resolve_card(board, card);
  ReactionFilter f;
  f.board_id = board;
  f.card_id = card;
  const auto records = store_.query(f);
  const CardSummary summary = card_summary(card, records);
  json body = to_json(summary);
  body["title"] = c.title;
  body["stage"] = {{"id", c.stage.id}, {"name", c.stage.name}};
  body["sentiment"] = rational_json(aggregate_sentiment(summary, schema_));
  return json_response(200, body);
}

ApiResponse Service::get_dashboard(const ApiRequest& req, const std::string& board) {
  const Principal principal = authenticate(req, board);
  if (!principal.is_manager()) fail(ApiErrorCode::kNotManager, "the dashboard is available to board admins only");

  Granularity granularity = Granularity::kDay;
  if (auto g = single_query(req, "granularity")) {
    auto parsed = parse_granularity(*g);
    if (!parsed) fail(ApiErrorCode::kBadQuery, "granularity must be hour, day or week");
    granularity = *parsed;
  }

  ReactionFilter filter;
  filter.board_id = board;
  if (auto emotions = query_values(req, "emotion"); !emotions.empty()) {
    std::set<EmotionKind> kinds;
    for (const auto& e : emotions) {
      auto k = parse_kind(e);
      if (!k) fail(ApiErrorCode::kBadQuery, "unknown emotion '" + e + "'");
      kinds.insert(*k);
    }
    filter.emotions = kinds;
  }
  if (auto member = single_query(req, "member")) filter.member_id = *member;
  if (auto card = single_query(req, "card")) filter.card_id = *card;
  if (auto from = single_query(req, "from")) filter.from = query_time("from", *from);
  if (auto to = single_query(req, "to")) filter.to = query_time("to", *to);
  if (auto stages = query_values(req, "stage"); !stages.empty()) {
    filter.stage_ids = std::set<std::string>(stages.begin(), stages.end());
  }
  if (filter.from && filter.to && !(*filter.from < *filter.to)) {
    fail(ApiErrorCode::kBadQuery, "from must be earlier than to");
  }

  const auto records = store_.query(filter);
  const Scope scope{board, filter.card_id};
  const TimeSeries series = time_series(scope, granularity, filter, records);

  json peaks = json::array();
  for (EmotionKind k : series.emotions) {
    for (const auto& p : detect_peaks(series, k)) peaks.push_back(to_json(p));
  }

  // Averages table: every card on the board plus any card only present in history.
  std::vector<Card> cards;
  try {
    cards = provider_.list_cards(board);
  } catch (const Error& e) {
    log_warning(std::string("card listing failed, using history only: ") + e.what());
  }
  std::set<std::string> seen;
  for (const auto& c : cards) seen.insert(c.id);
  for (const auto& r : records) {
    if (seen.insert(r.card_id).second) cards.push_back(Card{r.card_id, board, "", r.stage});
  }
  json card_rows = json::array();
  for (const auto& c : cards) {
    if (filter.card_id && c.id != *filter.card_id) continue;
    const CardSummary s = card_summary(c.id, records);
    json row = to_json(s);
    row["title"] = c.title;
    row["stage"] = {{"id", c.stage.id}, {"name", c.stage.name}};
    row["sentiment"] = rational_json(aggregate_sentiment(s, schema_));
    card_rows.push_back(std::move(row));
  }

  const CardSummary overall = board_summary(board, records);
  json body = {
      {"board_id", board},
      {"series", to_json(series)},
      {"peaks", peaks},
      {"stages", to_json(stage_breakdown(scope, records))},
      {"summary", to_json(overall)},
      {"sentiment", rational_json(aggregate_sentiment(overall, schema_))},
      {"cards", card_rows},
  };
  return json_response(200, body);
}

ApiResponse Service::get_my_reactions(const ApiRequest& req, const std::string& board) {
  const Principal principal = authenticate(req, board);
  ReactionFilter f;
  f.board_id = board;
  f.member_id = principal.member_id;
  return json_response(200, {{"records", records_json(store_.query(f))}});
}

ApiResponse Service::post_webhook(const ApiRequest& req) {
  if (!config_.webhook_secret.empty()) {
    const auto signature = req.header("x-trello-webhook");
    const std::string expected = crypto::base64_encode(
        crypto::hmac_sha1(config_.webhook_secret, req.body + config_.webhook_callback_url));
    if (!signature || !crypto::constant_time_equal(*signature, expected)) {
      fail(ApiErrorCode::kUnauthorized, "webhook signature mismatch");
    }
  }
  const json event = json::parse(req.body, nullptr, false);
  if (event.is_discarded()) fail(ApiErrorCode::kBadRequest, "webhook body is not JSON");
  const WebhookOutcome outcome = webhook_target_->webhook_ingest(event);
  return json_response(200, {{"outcome", to_string(outcome)}});
}

std::unique_ptr<ReactionStore> open_store(const StorageSettings& storage) {
  if (storage.kind == StorageSettings::Kind::kFile) {
    return std::make_unique<ReactionStore>(std::make_unique<SqliteBackend>(storage.path));
  }
  return std::make_unique<ReactionStore>();
}

Runtime build_runtime(const ServiceConfig& config, Clock clock) {
  config.validate();
  Runtime rt;
  rt.store = open_store(config.storage);
  if (config.provider.kind == ProviderSettings::Kind::kLocal) {
    rt.provider = LocalRoster::load_file(config.provider.roster_path);
  } else {
    auto adapter = std::make_unique<TrelloAdapter>(
        config.trello, std::make_shared<HttplibTransport>(config.trello.base_url), clock);
    rt.trello = adapter.get();
    rt.provider = std::move(adapter);
  }
  rt.service = std::make_unique<Service>(config, *rt.store, *rt.provider, clock, rt.trello);
  return rt;
}

}  // namespace emotrack
