// Minimal stderr logger.  Verbosity comes from the DMED_LOG environment
// variable: quiet | warn | info (default warn).

#pragma once

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <set>
#include <string>
#include <string_view>

namespace dmed::log {

enum class Level { kQuiet = 0, kWarn = 1, kInfo = 2 };

inline Level level() {
  static const Level lv = [] {
    const char* env = std::getenv("DMED_LOG");
    if (env == nullptr) return Level::kWarn;
    const std::string_view s(env);
    if (s == "quiet") return Level::kQuiet;
    if (s == "info") return Level::kInfo;
    return Level::kWarn;
  }();
  return lv;
}

inline void warn(const std::string& msg) {
  if (level() >= Level::kWarn) std::fprintf(stderr, "[dmed] warning: %s\n", msg.c_str());
}

inline void info(const std::string& msg) {
  if (level() >= Level::kInfo) std::fprintf(stderr, "[dmed] %s\n", msg.c_str());
}

// Emits a warning only the first time `key` is seen in this process.
inline void warn_once(const std::string& key, const std::string& msg) {
  static std::mutex mu;
  static std::set<std::string> seen;
  {
    const std::lock_guard<std::mutex> lock(mu);
    if (!seen.insert(key).second) return;
  }
  warn(msg);
}

}  // namespace dmed::log
