#pragma once

#include <string>

namespace regem::detail {

enum class LogLevel { kOff = 0, kInfo = 1, kDebug = 2 };

// Level from the REGEM_LOG environment variable ("info", "debug"; anything
// else nonempty counts as info). Read once per process.
LogLevel log_level();

void log(const std::string& msg);  // writes to stderr when logging is on

}  // namespace regem::detail
