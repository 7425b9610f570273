#pragma once

#include "rtakit/filters.hpp"
#include "rtakit/random.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rta {

inline constexpr double kTolSafety    = 1e-2;
inline constexpr double kMaxStepCount = 1e7;

/// The controller whose output the filter checks: u_des = k(t, x).
struct PrimaryController
{
  std::string name;
  std::function<Vec(double, const Vec &)> eval;
  /// Present for constant controllers so batch kernels can use the value.
  std::optional<Vec> constant;

  Vec operator()(double t, const Vec & x) const { return eval(t, x); }
};

PrimaryController constant_primary(Vec u);

struct ScenarioConfig
{
  std::string id;
  /// Filter (including its plant). FilterKind::none runs the primary controller directly.
  FilterConfig filter;
  PrimaryController primary;
  /// Constraint set used for the safety metrics; defaults to filter.constraint when empty.
  IntersectionSet constraint;
  /// Safe set reported by min_safe_margin; optional.
  IntersectionSet safe_set;
  Vec x0;
  double duration{10.0};
  double rate{10.0};
  int substeps{10};
  std::uint64_t seed{0};
  /// Simulate the disturbance channel of filter.nondet with a random w per tick.
  bool disturbed{false};

  void validate() const;
};

struct StepRecord
{
  double t{0.0};
  Vec x;
  Vec u_des;
  Vec u_act;
  bool intervened{false};
  double margin{0.0};
  FilterMode mode{FilterMode::pass};
};

struct MetricsReport
{
  int steps{0};
  int activation_steps{0};
  double activation_seconds{0.0};
  /// Integral of |u_act - u_des| over time.
  double control_deviation{0.0};
  double min_constraint_margin{0.0};
  double min_safe_margin{0.0};
  bool violated{false};
  bool blew_up{false};
  /// -1 when the filter never intervened.
  double first_intervention_time{-1.0};
  double first_intervention_margin{0.0};
  /// First time the constraint margin drops below zero, linearly interpolated; -1 if never.
  double first_violation_time{-1.0};
  /// Largest step-to-step change of u_act (infinity norm).
  double max_input_jump{0.0};
};

struct RunResult
{
  std::string scenario;
  std::vector<StepRecord> records;
  /// Substep-resolution state history.
  Trajectory fine;
  MetricsReport summary;
  std::string diagnostic;
};

RunResult run_closed_loop(const ScenarioConfig & cfg);

struct SafeVolumeResult
{
  double fraction{0.0};
  int samples{0};
  int safe{0};
  bool used_batch_kernel{false};
};

/// Fraction of initial states drawn uniformly from `box` whose filtered closed loop keeps the constraint margin
/// above -tol_safety over `horizon`. `allow_batch` enables the planar linear Simplex kernel when it applies.
SafeVolumeResult safe_volume_estimate(
  const ScenarioConfig & cfg, const Box & box, int n_samples, double horizon, std::uint64_t seed, bool allow_batch = true);

struct ComparisonRow
{
  FilterKind filter{FilterKind::none};
  MetricsReport metrics;
  std::vector<int> activation_indices;
  std::vector<double> u_act0;
};

struct ComparisonTable
{
  std::vector<ComparisonRow> rows;
  /// Symmetric Hausdorff distance (in steps) between the rbsf and sbsf activation index sets; -1 if not both run.
  int simplex_activation_gap{-1};
  bool all_safe{true};
  /// easif first intervention no later than rbsf's.
  bool easif_intervenes_first{true};
};

/// Runs the scenario once per filter with identical seeds and discretization.
ComparisonTable compare_filters(const std::string & scenario_id, const std::vector<FilterKind> & filters);

int activation_gap(const std::vector<int> & a, const std::vector<int> & b);

}  // namespace rta
