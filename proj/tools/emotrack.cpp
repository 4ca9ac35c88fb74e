// emotrack: administrative CLI and service entry point.
//
//   emotrack serve [--demo]
//   emotrack seed-demo [--roster-out PATH]
//   emotrack export --board B --format csv|jsonl [--out PATH]
//   emotrack report --board B [--card C]
//   emotrack issue-token --member M --board B [--ttl SECONDS]
//
// Configuration precedence: flags > EMOTRACK_* environment > --config file.
// Secrets (token secret, Trello key/token) are never accepted as flags.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "emotrack/analytics.hpp"
#include "emotrack/auth.hpp"
#include "emotrack/config.hpp"
#include "emotrack/demo.hpp"
#include "emotrack/error.hpp"
#include "emotrack/http_server.hpp"
#include "emotrack/local_roster.hpp"
#include "emotrack/log.hpp"
#include "emotrack/service.hpp"

namespace {

using namespace emotrack;

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitUpstream = 4;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMalformed:
      return kExitConfig;
    case ErrorCode::kIo:
    case ErrorCode::kStorage:
      return kExitIo;
    case ErrorCode::kUpstream:
    case ErrorCode::kProviderUnavailable:
      return kExitUpstream;
    default:
      return kExitUsage;
  }
}

struct GlobalFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> storage;
  std::optional<std::string> provider;
  std::optional<std::string> listen;
  std::optional<double> role_cache_ttl;
  std::vector<std::string> cors_origins;
  std::string log_level = "info";
};

ServiceConfig resolve_config(const GlobalFlags& flags) {
  ServiceConfig c = load_config(flags.config_path, process_env());
  if (flags.storage) c.storage = parse_storage_spec(*flags.storage);
  if (flags.provider) c.provider = parse_provider_spec(*flags.provider);
  if (flags.listen) c.set_listen(*flags.listen);
  if (flags.role_cache_ttl) {
    c.role_cache_ttl = std::chrono::milliseconds(static_cast<std::int64_t>(*flags.role_cache_ttl * 1000));
  }
  if (!flags.cors_origins.empty()) c.cors_origins = flags.cors_origins;
  return c;
}

std::string require_board(const std::optional<std::string>& board) {
  if (!board || board->empty()) throw Error(ErrorCode::kConfig, "--board is required");
  return *board;
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const GlobalFlags& flags, bool demo) {
  ServiceConfig config = resolve_config(flags);
  if (demo && config.provider.kind == ProviderSettings::Kind::kNone) {
    if (config.token_secret.empty()) throw Error(ErrorCode::kConfig, "token secret is not configured");
    Runtime rt;
    rt.store = open_store(config.storage);
    auto roster = LocalRoster::load(demo::roster_document());
    if (rt.store->size() == 0) demo::seed(*rt.store, *roster, system_now());
    rt.provider = std::move(roster);
    rt.service = std::make_unique<Service>(config, *rt.store, *rt.provider, system_clock());
    HttpServer server(*rt.service);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    log_info("serving demo board on " + config.listen_host + ":" + std::to_string(config.listen_port));
    if (!server.listen(config.listen_host, config.listen_port)) {
      throw Error(ErrorCode::kIo, "cannot listen on " + config.listen_host + ":" + std::to_string(config.listen_port));
    }
    return 0;
  }

  Runtime rt = build_runtime(config, system_clock());
  if (demo) {
    auto* roster = dynamic_cast<LocalRoster*>(rt.provider.get());
    if (!roster) throw Error(ErrorCode::kConfig, "--demo requires a local provider");
    if (rt.store->size() == 0) demo::seed(*rt.store, *roster, system_now());
  }
  HttpServer server(*rt.service);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  log_info("listening on " + config.listen_host + ":" + std::to_string(config.listen_port));
  if (!server.listen(config.listen_host, config.listen_port)) {
    throw Error(ErrorCode::kIo, "cannot listen on " + config.listen_host + ":" + std::to_string(config.listen_port));
  }
  return 0;
}

int run_seed_demo(const GlobalFlags& flags, const std::optional<std::string>& roster_out) {
  const ServiceConfig config = resolve_config(flags);
  if (config.storage.kind == StorageSettings::Kind::kMemory) {
    log_warning("seeding in-memory storage; the data is discarded on exit");
  }
  auto store = open_store(config.storage);
  auto roster = LocalRoster::load(demo::roster_document());
  const std::size_t n = demo::seed(*store, *roster, system_now());

  std::optional<std::string> roster_path = roster_out;
  if (!roster_path && config.provider.kind == ProviderSettings::Kind::kLocal &&
      !std::ifstream(config.provider.roster_path)) {
    roster_path = config.provider.roster_path;
  }
  if (roster_path) {
    std::ofstream out(*roster_path);
    if (!(out << roster->to_document().dump(2) << '\n')) {
      throw Error(ErrorCode::kIo, "cannot write roster '" + *roster_path + "'");
    }
    std::cout << "wrote demo roster to " << *roster_path << '\n';
  }
  std::cout << "seeded " << n << " reactions on board " << demo::kBoardId << '\n';
  return 0;
}

int run_export(const GlobalFlags& flags, const std::optional<std::string>& board,
               const std::string& format_text, const std::string& out_path) {
  const std::string b = require_board(board);
  auto format = parse_export_format(format_text);
  if (!format) {
    std::cerr << "error: --format must be csv or jsonl\n";
    return kExitUsage;
  }
  const ServiceConfig config = resolve_config(flags);
  auto store = open_store(config.storage);
  ReactionFilter f;
  f.board_id = b;
  if (out_path == "-") {
    store->export_records(f, *format, std::cout);
    std::cout.flush();
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + out_path + "' for writing");
  store->export_records(f, *format, out);
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "write to '" + out_path + "' failed");
  return 0;
}

int run_report(const GlobalFlags& flags, const std::optional<std::string>& board,
               const std::optional<std::string>& card) {
  const std::string b = require_board(board);
  const ServiceConfig config = resolve_config(flags);
  auto store = open_store(config.storage);
  ReactionFilter f;
  f.board_id = b;
  if (card) f.card_id = *card;
  const auto records = store->query(f);

  std::set<std::string> cards;
  for (const auto& r : records) cards.insert(r.card_id);
  if (card) cards.insert(*card);

  std::cout << "board " << b << '\n';
  std::cout << std::left << std::setw(22) << "card" << std::setw(12) << "emotion" << std::right
            << std::setw(7) << "count" << std::setw(7) << "mean" << std::setw(13) << "respondents"
            << '\n';
  for (const auto& c : cards) {
    const CardSummary s = card_summary(c, records);
    bool any = false;
    for (const auto& row : s.rows) {
      if (row.count == 0) continue;
      any = true;
      std::cout << std::left << std::setw(22) << c << std::setw(12) << to_string(row.emotion)
                << std::right << std::setw(7) << row.count << std::setw(7) << std::fixed
                << std::setprecision(1) << to_double(*row.mean) << std::setw(13) << s.respondent_count
                << '\n';
    }
    if (!any) std::cout << std::left << std::setw(22) << c << "(no reactions)\n";
  }
  return 0;
}

int run_issue_token(const GlobalFlags& flags, const std::string& member, const std::string& board,
                    double ttl_seconds) {
  const ServiceConfig config = resolve_config(flags);
  if (config.token_secret.empty()) throw Error(ErrorCode::kConfig, "token secret is not configured");
  if (ttl_seconds <= 0) throw Error(ErrorCode::kConfig, "--ttl must be positive");
  const Timestamp now = system_now();
  const TokenClaims claims{member, board, now,
                           Timestamp{now.ms + static_cast<std::int64_t>(ttl_seconds * 1000)}};
  std::cout << sign_token(claims, config.token_secret) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emotrack - emotion telemetry for agile boards"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "JSON configuration file");
  app.add_option("--storage", flags.storage, "memory | file:PATH");
  app.add_option("--provider", flags.provider, "local:PATH | trello");
  app.add_option("--listen", flags.listen, "HOST:PORT");
  app.add_option("--role-cache-ttl", flags.role_cache_ttl, "role cache TTL in seconds");
  app.add_option("--cors-origin", flags.cors_origins, "allowed CORS origin (repeatable)");
  app.add_option("--log-level", flags.log_level, "debug | info | warning | error | off");

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  bool demo = false;
  serve->add_flag("--demo", demo, "seed the built-in demo board into an empty store");

  auto* seed = app.add_subcommand("seed-demo", "load the demo roster and reaction history");
  std::optional<std::string> roster_out;
  seed->add_option("--roster-out", roster_out, "write the demo roster document here");

  auto* exp = app.add_subcommand("export", "export a board's reactions");
  std::optional<std::string> export_board;
  std::string format = "csv";
  std::string out_path = "-";
  exp->add_option("--board", export_board, "board id");
  exp->add_option("--format", format, "csv | jsonl");
  exp->add_option("--out", out_path, "output path, - for stdout");

  auto* report = app.add_subcommand("report", "print per-card averages");
  std::optional<std::string> report_board;
  std::optional<std::string> report_card;
  report->add_option("--board", report_board, "board id");
  report->add_option("--card", report_card, "restrict to one card");

  auto* token = app.add_subcommand("issue-token", "mint a bearer token with the configured secret");
  std::string member, token_board;
  double ttl = 3600;
  token->add_option("--member", member, "member id")->required();
  token->add_option("--board", token_board, "board id")->required();
  token->add_option("--ttl", ttl, "lifetime in seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  static const std::map<std::string, LogLevel> kLevels = {
      {"debug", LogLevel::kDebug}, {"info", LogLevel::kInfo}, {"warning", LogLevel::kWarning},
      {"error", LogLevel::kError}, {"off", LogLevel::kOff}};
  auto level = kLevels.find(flags.log_level);
  if (level == kLevels.end()) {
    std::cerr << "error: unknown --log-level '" << flags.log_level << "'\n";
    return kExitUsage;
  }
  set_log_level(level->second);

  try {
    if (*serve) return run_serve(flags, demo);
    if (*seed) return run_seed_demo(flags, roster_out);
    if (*exp) return run_export(flags, export_board, format, out_path);
    if (*report) return run_report(flags, report_board, report_card);
    if (*token) return run_issue_token(flags, member, token_board, ttl);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
