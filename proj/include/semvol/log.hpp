#pragma once

#include <spdlog/logger.h>

#include <memory>

namespace semvol {

/// Library logger writing to stderr. The level comes from SEMVOL_LOG
/// (trace, debug, info, warn, error, off; default warn).
std::shared_ptr<spdlog::logger> log();

}  // namespace semvol
