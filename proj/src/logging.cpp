#include "bitext/common.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace bitext {

namespace {

LogLevel parse_level(const char* s) {
  std::string v = s ? s : "";
  for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v == "debug") return LogLevel::kDebug;
  if (v == "info") return LogLevel::kInfo;
  if (v == "warn" || v == "warning") return LogLevel::kWarn;
  if (v == "error") return LogLevel::kError;
  if (v == "off" || v == "none") return LogLevel::kOff;
  return LogLevel::kWarn;
}

LogLevel& level_storage() {
  static LogLevel level = parse_level(std::getenv("BITEXT_LOG"));
  return level;
}

const char* level_tag(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug: return "debug";
    case LogLevel::kInfo: return "info";
    case LogLevel::kWarn: return "warn";
    case LogLevel::kError: return "error";
    default: return "?";
  }
}

}  // namespace

LogLevel log_level() { return level_storage(); }

void set_log_level(LogLevel level) { level_storage() = level; }

void log_message(LogLevel level, const std::string& msg) {
  if (level < level_storage() || level == LogLevel::kOff) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[bitext " << level_tag(level) << "] " << msg << "\n";
}

}  // namespace bitext
