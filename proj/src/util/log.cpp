#include "wic/util/log.hpp"

#include <atomic>
#include <mutex>

namespace wic::log {
namespace {

std::atomic<Level> g_threshold{Level::info};
std::mutex g_mutex;

const char* tag(Level level) {
  switch (level) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
  }
  return "?";
}

}  // namespace

Level threshold() { return g_threshold.load(std::memory_order_relaxed); }
void set_threshold(Level level) { g_threshold.store(level, std::memory_order_relaxed); }

void write(Level level, std::string_view message) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << '[' << tag(level) << "] " << message << '\n';
}

}  // namespace wic::log
