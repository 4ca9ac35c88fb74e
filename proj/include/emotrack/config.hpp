#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emotrack/trello.hpp"

namespace emotrack {

struct ProviderSettings {
  enum class Kind { kNone, kLocal, kTrello };
  Kind kind = Kind::kNone;
  std::string roster_path;  // kLocal
};

struct StorageSettings {
  enum class Kind { kMemory, kFile };
  Kind kind = Kind::kMemory;
  std::string path;  // kFile
};

// "local:PATH" | "trello". Throws Error(kConfig).
ProviderSettings parse_provider_spec(const std::string& spec);
// "memory" | "file:PATH". Throws Error(kConfig).
StorageSettings parse_storage_spec(const std::string& spec);

struct ServiceConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::string token_secret;
  ProviderSettings provider;
  StorageSettings storage;
  TrelloConfig trello;
  std::string webhook_secret;        // enables X-Trello-Webhook verification
  std::string webhook_callback_url;  // part of the signed content
  std::chrono::milliseconds role_cache_ttl = std::chrono::seconds(60);
  std::vector<std::string> cors_origins;

  void set_listen(const std::string& host_port);

  // Throws Error(kConfig) naming the first problem.
  void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

EnvLookup process_env();

// Later layers win: defaults < config file < EMOTRACK_* environment.
// Command-line flags are applied by the caller afterwards.
void apply_config_document(ServiceConfig& config, const nlohmann::json& doc);
void apply_environment(ServiceConfig& config, const EnvLookup& env);

ServiceConfig load_config(const std::optional<std::string>& path, const EnvLookup& env);

}  // namespace emotrack
