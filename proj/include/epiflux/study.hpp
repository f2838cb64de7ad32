#pragma once

#include "epiflux/config.hpp"

namespace epiflux {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes shared by run_study and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;
inline constexpr int kExitGateFailure = 4;

// Runs the configured study and writes its CSV/JSON outputs plus
// metadata.json into config.out_dir. Returns kExitOk, or kExitGateFailure
// when config.gate is set and a statistical gate fails. Config and runtime
// problems surface as exceptions (ConfigError, std::runtime_error).
int run_study(const RunConfig& config);

}  // namespace epiflux
