#pragma once

#include "rtakit/harness.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rta {

struct ScenarioInfo
{
  std::string id;
  std::string plant;
  FilterKind default_filter{FilterKind::none};
  /// Filters the scenario is configured for (always includes none).
  std::vector<FilterKind> filters;
  std::string description;
};

/// Registered scenarios sorted by id.
const std::vector<ScenarioInfo> & scenario_catalog();
/// Throws UsageError listing the valid ids.
const ScenarioInfo & scenario_info(const std::string & id);

/// Optional replacements applied on top of a scenario's defaults.
struct ScenarioOverrides
{
  std::optional<FilterKind> filter;
  std::optional<double> duration;
  std::optional<double> rate;
  std::optional<std::uint64_t> seed;
  ParamMap params;
  std::optional<Vec> x0;
  std::optional<PrimaryController> primary;
  std::optional<AlphaFunction> alpha;
  std::optional<double> horizon;
  std::optional<double> dt_backup;
  std::optional<double> eps1;
  std::optional<double> eps2;
  std::optional<double> barrier_buffer;
  std::optional<LatchRule> latch;
  bool fault_flip_barrier{false};
};

ScenarioConfig make_scenario(const std::string & id, const ScenarioOverrides & ov = {});

/// Initial box of the mm_reach_demo scenario.
Hyperrectangle mm_reach_demo_initial_set();

/// u_i = amplitude_i sin(frequency_i t + phase_i).
PrimaryController sinusoid_primary(Vec amplitude, Vec frequency, Vec phase);
/// u = K x + k0.
PrimaryController linear_primary(Mat K, Vec k0);

}  // namespace rta
