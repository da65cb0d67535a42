#include "mmp/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <string_view>

namespace mmp::log {

namespace {

Level from_env() {
  const char* v = std::getenv("MMP_LOG");
  if (v == nullptr) return Level::warn;
  const std::string_view s(v);
  if (s == "error") return Level::error;
  if (s == "info") return Level::info;
  if (s == "debug") return Level::debug;
  return Level::warn;
}

std::atomic<int>& current() {
  static std::atomic<int> level{static_cast<int>(from_env())};
  return level;
}

const char* name(Level l) {
  switch (l) {
    case Level::error: return "error";
    case Level::warn: return "warn";
    case Level::info: return "info";
    case Level::debug: return "debug";
  }
  return "?";
}

}  // namespace

Level threshold() { return static_cast<Level>(current().load()); }
void set_threshold(Level level) { current().store(static_cast<int>(level)); }
bool enabled(Level level) { return static_cast<int>(level) <= current().load(); }

void write(Level level, const std::string& event, const std::string& fields) {
  if (!enabled(level)) return;
  std::cerr << "level=" << name(level) << " event=" << event;
  if (!fields.empty()) std::cerr << ' ' << fields;
  std::cerr << '\n';
}

}  // namespace mmp::log
