#pragma once

#include <memory>

#include <spdlog/spdlog.h>

namespace flagsim {

/// Shared stderr logger. Level comes from FLAGSIM_LOG (trace, debug, info,
/// warn, error, off); default warn.
spdlog::logger& log();

}  // namespace flagsim
