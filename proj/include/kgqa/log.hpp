#pragma once

// Minimal leveled logging to stderr.  Library code logs sparingly (warn and
// below); the CLI sets the threshold from --log-level.

#include <iostream>
#include <mutex>
#include <string>

#include "kgqa/errors.hpp"

namespace kgqa {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

namespace detail {
inline LogLevel& log_threshold() {
  static LogLevel level = LogLevel::Info;
  return level;
}
inline std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

inline void set_log_level(LogLevel level) { detail::log_threshold() = level; }

inline LogLevel parse_log_level(const std::string& name) {
  if (name == "debug") return LogLevel::Debug;
  if (name == "info") return LogLevel::Info;
  if (name == "warn") return LogLevel::Warn;
  if (name == "error") return LogLevel::Error;
  throw ConfigError("unknown log level: " + name);
}

inline void log(LogLevel level, const std::string& msg) {
  if (level < detail::log_threshold()) return;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::lock_guard<std::mutex> lock(detail::log_mutex());
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

}  // namespace kgqa
