#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "emotrack/auth.hpp"
#include "emotrack/config.hpp"
#include "emotrack/emotion.hpp"
#include "emotrack/provider.hpp"
#include "emotrack/store.hpp"
#include "emotrack/trello.hpp"

namespace emotrack {

// Transport-independent request. Header names are lowercase; path is already
// percent-decoded.
struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> headers;
  std::multimap<std::string, std::string> query;
  std::string body;

  std::optional<std::string> header(std::string_view name) const;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

// Fixed error-code enumeration of the HTTP API.
enum class ApiErrorCode {
  kBadRequest,          // 400 bad_request
  kUnauthorized,        // 401 unauthorized
  kNotManager,          // 403 not_manager
  kWrongBoard,          // 403 wrong_board
  kNotFound,            // 404 not_found
  kUnknownCard,         // 404 unknown_card
  kMethodNotAllowed,    // 405 method_not_allowed
  kInvalidRating,       // 422 invalid_rating
  kBadQuery,            // 422 bad_query
  kInternal,            // 500 internal_error
  kProviderUnavailable, // 503 provider_unavailable
  kStorageUnavailable,  // 503 storage_unavailable
};

struct ApiError {
  ApiErrorCode code;
  std::string message;

  int status() const noexcept;
  std::string_view code_name() const noexcept;
  nlohmann::json to_json() const;
};

// Binds capture, analytics, access control and the board provider into the
// /v1 JSON API. handle() is safe to call from concurrent threads.
class Service {
 public:
  Service(ServiceConfig config, ReactionStore& store, BoardStateProvider& provider, Clock clock,
          TrelloAdapter* webhook_target = nullptr);

  ApiResponse handle(const ApiRequest& request);

  RoleResolver& roles() { return roles_; }
  const ServiceConfig& config() const { return config_; }

 private:
  ApiResponse dispatch(const ApiRequest& request);
  Principal verify_bearer(const ApiRequest& request) const;
  Principal authenticate(const ApiRequest& request, const std::string& board_id);
  Card resolve_card(const std::string& board_id, const std::string& card_id);

  ApiResponse post_reactions(const ApiRequest& req, const std::string& board, const std::string& card);
  ApiResponse get_card_reactions(const ApiRequest& req, const std::string& board, const std::string& card);
  ApiResponse get_summary(const ApiRequest& req, const std::string& board, const std::string& card);
  ApiResponse get_dashboard(const ApiRequest& req, const std::string& board);
  ApiResponse get_my_reactions(const ApiRequest& req, const std::string& board);
  ApiResponse post_webhook(const ApiRequest& req);
  void apply_cors(const ApiRequest& req, ApiResponse& res) const;

  ServiceConfig config_;
  ReactionStore& store_;
  BoardStateProvider& provider_;
  Clock clock_;
  TrelloAdapter* webhook_target_;
  RoleResolver roles_;
  EmotionSchema schema_;
};

ApiResponse json_response(int status, const nlohmann::json& body);
ApiResponse error_response(const ApiError& error);

// Owns everything a running service needs, built from configuration.
struct Runtime {
  std::unique_ptr<ReactionStore> store;
  std::unique_ptr<BoardStateProvider> provider;
  TrelloAdapter* trello = nullptr;  // non-owning view of provider when in Trello mode
  std::unique_ptr<Service> service;
};

// Throws Error(kConfig / kStorage / kIo).
Runtime build_runtime(const ServiceConfig& config, Clock clock);

std::unique_ptr<ReactionStore> open_store(const StorageSettings& storage);

}  // namespace emotrack
