#include "domsfm/log.hpp"

#include <atomic>
#include <cstdio>

#include "domsfm/types.hpp"

namespace domsfm {

namespace {
std::atomic<LogLevel> g_level{LogLevel::Info};

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    case LogLevel::Error: return "error";
  }
  return "?";
}
}  // namespace

void set_log_level(LogLevel level) { g_level.store(level); }
LogLevel log_level() { return g_level.load(); }
bool log_enabled(LogLevel level) { return static_cast<int>(level) >= static_cast<int>(g_level.load()); }

LogLevel parse_log_level(const std::string& name) {
  if (name == "debug") return LogLevel::Debug;
  if (name == "info") return LogLevel::Info;
  if (name == "warn") return LogLevel::Warn;
  if (name == "error") return LogLevel::Error;
  throw ValidationError("unknown log level '" + name + "' (expected debug|info|warn|error)");
}

void log(LogLevel level, std::string_view message) {
  if (!log_enabled(level)) return;
  std::fprintf(stderr, "[%s] %.*s\n", level_name(level), static_cast<int>(message.size()),
               message.data());
}

}  // namespace domsfm
