#include "emsx/error.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace emsx {

namespace {
std::atomic<bool> g_warnings{true};
std::mutex g_mutex;
}  // namespace

void log_warning(const std::string& message) {
  if (!g_warnings.load()) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { g_warnings.store(enabled); }

}  // namespace emsx
