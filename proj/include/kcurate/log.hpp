#pragma once

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>
#include <string>

namespace kcurate {

/// Shared stderr logger. Level comes from KCURATE_LOG (trace..off),
/// default "warn"; the CLI raises it to "info".
inline spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    auto l = std::make_shared<spdlog::logger>("kcurate", sink);
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("KCURATE_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return *logger;
}

}  // namespace kcurate
