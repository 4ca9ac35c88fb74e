#include "emotrack/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include "emotrack/time.hpp"

namespace emotrack {
namespace {

std::atomic<LogLevel> g_level{LogLevel::kInfo};
std::mutex g_mu;

std::string_view level_name(LogLevel l) {
  switch (l) {
    case LogLevel::kDebug: return "debug";
    case LogLevel::kInfo: return "info";
    case LogLevel::kWarning: return "warning";
    case LogLevel::kError: return "error";
    case LogLevel::kOff: return "off";
  }
  return "?";
}

}  // namespace

void set_log_level(LogLevel level) { g_level = level; }

void log(LogLevel level, std::string_view message) {
  if (level < g_level.load()) return;
  std::lock_guard lock(g_mu);
  std::cerr << format_rfc3339(system_now()) << ' ' << level_name(level) << ' ' << message << '\n';
}

}  // namespace emotrack
