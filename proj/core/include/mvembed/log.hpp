#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace mvembed::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

// Level comes from MVEMBED_LOG (debug|info|warn|error|off); default warn.
inline Level& threshold() {
  static Level lvl = [] {
    const char* env = std::getenv("MVEMBED_LOG");
    if (!env) return Level::Warn;
    if (!std::strcmp(env, "debug")) return Level::Debug;
    if (!std::strcmp(env, "info")) return Level::Info;
    if (!std::strcmp(env, "warn")) return Level::Warn;
    if (!std::strcmp(env, "error")) return Level::Error;
    if (!std::strcmp(env, "off")) return Level::Off;
    return Level::Warn;
  }();
  return lvl;
}

inline void emit(Level lvl, const char* prefix, const std::string& msg) {
  if (lvl < threshold()) return;
  std::fprintf(stderr, "[%s] %s\n", prefix, msg.c_str());
}

inline void debug(const std::string& msg) { emit(Level::Debug, "debug", msg); }
inline void info(const std::string& msg) { emit(Level::Info, "info", msg); }
inline void warn(const std::string& msg) { emit(Level::Warn, "warn", msg); }
inline void error(const std::string& msg) { emit(Level::Error, "error", msg); }

}  // namespace mvembed::log
