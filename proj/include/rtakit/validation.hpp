#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rta {

struct CheckResult
{
  std::string scenario;
  std::string name;
  bool passed{false};
  std::string detail;
};

struct ValidationReport
{
  std::vector<CheckResult> checks;

  bool passed() const;
};

/// Invariant suites relevant to one scenario: set gradients, Nagumo boundary checks, QP oracle agreement,
/// sensitivity against finite differences, reachability containment and closed-loop safety of every configured
/// filter. `flip_barrier` injects the barrier sign fault into the filters.
ValidationReport validate_scenario(const std::string & id, std::uint64_t seed, bool flip_barrier = false);

}  // namespace rta
