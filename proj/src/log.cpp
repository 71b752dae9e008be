#include "sqlgen/log.hpp"

#include <cstdlib>
#include <iostream>

#include "sqlgen/strings.hpp"

namespace sqlgen {

namespace {

LogLevel g_level = [] {
  const char* env = std::getenv("SQLGEN_LOG");
  if (env == nullptr) return LogLevel::Info;
  std::string v = fold_case(env);
  if (v == "error") return LogLevel::Error;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}();

void emit(const char* tag, const std::string& msg) {
  std::cerr << tag << msg << "\n";
}

}  // namespace

LogLevel log_level() { return g_level; }

void set_log_level(LogLevel level) { g_level = level; }

void log_error(const std::string& msg) { emit("[error] ", msg); }

void log_warn(const std::string& msg) {
  if (g_level >= LogLevel::Info) emit("[warn] ", msg);
}

void log_info(const std::string& msg) {
  if (g_level >= LogLevel::Info) emit("[info] ", msg);
}

void log_debug(const std::string& msg) {
  if (g_level >= LogLevel::Debug) emit("[debug] ", msg);
}

}  // namespace sqlgen
