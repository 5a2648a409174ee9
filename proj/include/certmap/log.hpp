#pragma once

namespace certmap {

// Verbosity is controlled by the CERTMAP_LOG environment variable only
// (quiet|warn|info|debug). Default: warn.
enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level();

void logf(LogLevel level, const char* fmt, ...);

}  // namespace certmap
