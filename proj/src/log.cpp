#include "flagsim/log.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace flagsim {

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = spdlog::stderr_color_mt("flagsim");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("FLAGSIM_LOG"))
      l->set_level(spdlog::level::from_str(env));
    return l;
  }();
  return *logger;
}

}  // namespace flagsim
