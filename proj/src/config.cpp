#include "emotrack/config.hpp"

#include <cstdlib>
#include <fstream>

#include "emotrack/error.hpp"

namespace emotrack {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(sep, start);
    std::string part = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!part.empty()) out.push_back(std::move(part));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::chrono::milliseconds parse_seconds(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const double s = std::stod(text, &used);
    if (used != text.size() || s < 0) throw std::invalid_argument(text);
    return std::chrono::milliseconds(static_cast<std::int64_t>(s * 1000));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, std::string(what) + ": '" + text + "' is not a non-negative number of seconds");
  }
}

std::map<std::string, std::string> parse_board_map(const std::string& text) {
  std::map<std::string, std::string> out;
  for (const auto& pair : split(text, ',')) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
      throw Error(ErrorCode::kConfig, "EMOTRACK_TRELLO_BOARDS: expected local=remote, got '" + pair + "'");
    }
    out[pair.substr(0, eq)] = pair.substr(eq + 1);
  }
  return out;
}

template <typename T>
T json_get(const nlohmann::json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kConfig, std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

ProviderSettings parse_provider_spec(const std::string& spec) {
  if (spec == "trello") return {ProviderSettings::Kind::kTrello, {}};
  if (spec.rfind("local:", 0) == 0 && spec.size() > 6) {
    return {ProviderSettings::Kind::kLocal, spec.substr(6)};
  }
  throw Error(ErrorCode::kConfig, "provider must be 'local:PATH' or 'trello', got '" + spec + "'");
}

StorageSettings parse_storage_spec(const std::string& spec) {
  if (spec == "memory") return {StorageSettings::Kind::kMemory, {}};
  if (spec.rfind("file:", 0) == 0 && spec.size() > 5) {
    return {StorageSettings::Kind::kFile, spec.substr(5)};
  }
  throw Error(ErrorCode::kConfig, "storage must be 'memory' or 'file:PATH', got '" + spec + "'");
}

void ServiceConfig::set_listen(const std::string& host_port) {
  const auto colon = host_port.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorCode::kConfig, "listen address must be HOST:PORT, got '" + host_port + "'");
  }
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(host_port.substr(colon + 1), &used);
    if (used != host_port.size() - colon - 1) throw std::invalid_argument(host_port);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, "bad port in listen address '" + host_port + "'");
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::kConfig, "port out of range in '" + host_port + "'");
  listen_host = host_port.substr(0, colon);
  listen_port = port;
}

void ServiceConfig::validate() const {
  if (token_secret.empty()) throw Error(ErrorCode::kConfig, "token secret is not configured");
  switch (provider.kind) {
    case ProviderSettings::Kind::kNone:
      throw Error(ErrorCode::kConfig, "no board provider configured");
    case ProviderSettings::Kind::kLocal:
      if (provider.roster_path.empty()) throw Error(ErrorCode::kConfig, "local provider needs a roster path");
      break;
    case ProviderSettings::Kind::kTrello:
      if (trello.api_key.empty() || trello.api_token.empty()) {
        throw Error(ErrorCode::kConfig, "trello provider needs an API key and token");
      }
      break;
  }
  if (storage.kind == StorageSettings::Kind::kFile && storage.path.empty()) {
    throw Error(ErrorCode::kConfig, "file storage needs a path");
  }
  if (role_cache_ttl.count() < 0 || trello.stage_ttl.count() < 0) {
    throw Error(ErrorCode::kConfig, "cache ttl must not be negative");
  }
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str()); v != nullptr) return std::string(v);
    return std::nullopt;
  };
}

void apply_config_document(ServiceConfig& c, const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kConfig, "config document must be a JSON object");
  if (doc.contains("listen")) c.set_listen(json_get<std::string>(doc, "listen"));
  if (doc.contains("token_secret")) c.token_secret = json_get<std::string>(doc, "token_secret");
  if (doc.contains("provider")) c.provider = parse_provider_spec(json_get<std::string>(doc, "provider"));
  if (doc.contains("storage")) c.storage = parse_storage_spec(json_get<std::string>(doc, "storage"));
  if (doc.contains("role_cache_ttl_seconds")) {
    c.role_cache_ttl = std::chrono::milliseconds(
        static_cast<std::int64_t>(json_get<double>(doc, "role_cache_ttl_seconds") * 1000));
  }
  if (doc.contains("cors_origins")) c.cors_origins = json_get<std::vector<std::string>>(doc, "cors_origins");
  if (doc.contains("trello")) {
    const auto& t = doc["trello"];
    if (!t.is_object()) throw Error(ErrorCode::kConfig, "config key 'trello' must be an object");
    if (t.contains("base_url")) c.trello.base_url = json_get<std::string>(t, "base_url");
    if (t.contains("api_key")) c.trello.api_key = json_get<std::string>(t, "api_key");
    if (t.contains("api_token")) c.trello.api_token = json_get<std::string>(t, "api_token");
    if (t.contains("boards")) c.trello.boards = json_get<std::map<std::string, std::string>>(t, "boards");
    if (t.contains("stage_cache_ttl_seconds")) {
      c.trello.stage_ttl = std::chrono::milliseconds(
          static_cast<std::int64_t>(json_get<double>(t, "stage_cache_ttl_seconds") * 1000));
    }
    if (t.contains("webhook_secret")) c.webhook_secret = json_get<std::string>(t, "webhook_secret");
    if (t.contains("webhook_callback_url")) {
      c.webhook_callback_url = json_get<std::string>(t, "webhook_callback_url");
    }
  }
}

void apply_environment(ServiceConfig& c, const EnvLookup& env) {
  if (auto v = env("EMOTRACK_LISTEN")) c.set_listen(*v);
  if (auto v = env("EMOTRACK_TOKEN_SECRET")) c.token_secret = *v;
  if (auto v = env("EMOTRACK_PROVIDER")) c.provider = parse_provider_spec(*v);
  if (auto v = env("EMOTRACK_STORAGE")) c.storage = parse_storage_spec(*v);
  if (auto v = env("EMOTRACK_ROLE_CACHE_TTL")) c.role_cache_ttl = parse_seconds(*v, "EMOTRACK_ROLE_CACHE_TTL");
  if (auto v = env("EMOTRACK_STAGE_CACHE_TTL")) c.trello.stage_ttl = parse_seconds(*v, "EMOTRACK_STAGE_CACHE_TTL");
  if (auto v = env("EMOTRACK_CORS_ORIGINS")) c.cors_origins = split(*v, ',');
  if (auto v = env("EMOTRACK_TRELLO_BASE_URL")) c.trello.base_url = *v;
  if (auto v = env("EMOTRACK_TRELLO_KEY")) c.trello.api_key = *v;
  if (auto v = env("EMOTRACK_TRELLO_TOKEN")) c.trello.api_token = *v;
  if (auto v = env("EMOTRACK_TRELLO_BOARDS")) c.trello.boards = parse_board_map(*v);
  if (auto v = env("EMOTRACK_TRELLO_WEBHOOK_SECRET")) c.webhook_secret = *v;
  if (auto v = env("EMOTRACK_TRELLO_CALLBACK_URL")) c.webhook_callback_url = *v;
}

ServiceConfig load_config(const std::optional<std::string>& path, const EnvLookup& env) {
  ServiceConfig c;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(ErrorCode::kConfig, "cannot read config file '" + *path + "'");
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::kConfig, "config file '" + *path + "' is not valid JSON");
    apply_config_document(c, doc);
  }
  apply_environment(c, env);
  return c;
}

}  // namespace emotrack
