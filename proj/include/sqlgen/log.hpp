#pragma once

#include <string>

namespace sqlgen {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Level comes from SQLGEN_LOG (error|info|debug) on first use; default info.
LogLevel log_level();
void set_log_level(LogLevel level);

void log_error(const std::string& msg);
void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace sqlgen
