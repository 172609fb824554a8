#include "log.hpp"

#include <cstdlib>
#include <iostream>

namespace regem::detail {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* v = std::getenv("REGEM_LOG");
    if (!v || !*v) return LogLevel::kOff;
    const std::string s(v);
    if (s == "0" || s == "off") return LogLevel::kOff;
    if (s == "debug") return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

void log(const std::string& msg) {
  if (log_level() != LogLevel::kOff) std::cerr << "[regem] " << msg << "\n";
}

}  // namespace regem::detail
