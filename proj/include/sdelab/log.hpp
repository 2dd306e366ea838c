#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace sdelab {

/// Logging verbosity, controlled by the SDE_LAB_LOG environment variable
/// ("error" | "info" | "debug"; default "error").  Messages go to stderr so
/// stdout stays reserved for machine-readable output.
enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SDE_LAB_LOG");
    if (env == nullptr) return LogLevel::Error;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

template <typename... Args>
void log_at(LogLevel lvl, const char* tag, const char* fmt, Args... args) {
  if (lvl > log_level()) return;
  std::fprintf(stderr, "[%s] ", tag);
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

#define SDELAB_LOG_ERROR(...) \
  ::sdelab::log_at(::sdelab::LogLevel::Error, "error", __VA_ARGS__)
#define SDELAB_LOG_INFO(...) \
  ::sdelab::log_at(::sdelab::LogLevel::Info, "info", __VA_ARGS__)
#define SDELAB_LOG_DEBUG(...) \
  ::sdelab::log_at(::sdelab::LogLevel::Debug, "debug", __VA_ARGS__)

}  // namespace sdelab
