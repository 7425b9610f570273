#pragma once

#include "rtakit/scenarios.hpp"

#include <iosfwd>
#include <string>

namespace rta {

inline constexpr int kExitOk        = 0;
inline constexpr int kExitUsage     = 1;
inline constexpr int kExitViolation = 2;

/// Entry point of the rtakit command. Returns the process exit code.
int run_cli(int argc, const char * const * argv, std::ostream & out, std::ostream & err);

/// Reads a scenario override file with the flat schema
/// {scenario, plant, params, x0, primary, filter:{kind, alpha, horizon, dt_backup, epsilon1, epsilon2, latch},
///  duration, rate, seed}. Returns the scenario id named in the file, or `scenario` when absent.
std::string load_config(const std::string & path, const std::string & scenario, ScenarioOverrides & ov);

}  // namespace rta
