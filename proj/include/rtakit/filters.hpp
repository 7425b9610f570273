#pragma once

#include "rtakit/dynamics.hpp"
#include "rtakit/integration.hpp"
#include "rtakit/mm_reach.hpp"
#include "rtakit/qp.hpp"
#include "rtakit/sets.hpp"

#include <functional>
#include <optional>
#include <string>

namespace rta {

enum class AlphaKind { linear, cubic, tanh };

/// Extended class-K-infinity function: k s, k s^3 or k tanh(s).
struct AlphaFunction
{
  AlphaKind kind{AlphaKind::linear};
  double gain{1.0};

  double operator()(double s) const;
};

enum class FilterKind { none, rbsf, sbsf, easif, iasif, rasif, mmasif };
enum class FilterMode { pass, backup, qp_modified, qp_infeasible_fallback };

const char * to_string(FilterKind k);
const char * to_string(FilterMode m);
FilterKind parse_filter_kind(const std::string & s);
const std::vector<std::string> & filter_names();

struct FilterOutput
{
  Vec u_act;
  bool intervened{false};
  FilterMode mode{FilterMode::pass};
  /// Smallest set margin examined this step (candidate, path, barrier or Psi depending on the filter).
  double margin{0.0};
  std::optional<Trajectory> backup_traj;
  std::optional<QPSolution> solver;
  std::string diagnostic;
};

enum class ReleaseRule { instant, min_hold, condition };

struct LatchRule
{
  ReleaseRule rule{ReleaseRule::instant};
  double hold{0.0};
  /// Used by ReleaseRule::condition.
  std::function<bool(const Vec &)> predicate;
};

struct LatchState
{
  bool latched{false};
  double since{0.0};
  double last_t{-std::numeric_limits<double>::infinity()};
};

LatchState latch_update(const LatchState & latch, const LatchRule & rule, bool intervened_now, double t,
  bool release_predicate_result);

struct FilterConfig
{
  FilterKind kind{FilterKind::none};
  ContinuousAffinePlant plant;
  /// Disturbance model for rasif/mmasif. g2 and w_box are read from here.
  std::optional<NondetAffinePlant> nondet;
  /// Probe map for the Simplex filters (one controller period).
  std::optional<DiscretePlant> discrete;

  IntersectionSet constraint;
  IntersectionSet safe_set;
  IntersectionSet backup_set;
  FeedbackLaw backup;

  AlphaFunction alpha;
  double horizon{1.0};
  double dt_backup{0.05};
  /// Simplex backup steps for sbsf.
  int sbsf_steps{30};
  double eps{0.0};
  double eps1{1e-3};
  double eps2{1e-3};
  bool terminal_constraint{true};
  /// easif, rasif and mmasif enforce invariance of {h >= barrier_buffer}; 0 gives the plain barrier constraint.
  /// A positive buffer absorbs the overshoot of holding u over a control period.
  double barrier_buffer{0.0};
  LatchRule latch;
  double dt_ctrl{0.1};

  std::optional<DecompositionFunction> decomposition;
  double lse_p{1e3};
  /// Psi also requires the reachable rectangles to respect the constraint set along the horizon.
  bool psi_path_constraint{true};

  /// Flips the sign of every barrier constraint. Exists only for the validation mutation test.
  bool fault_flip_barrier{false};

  void validate() const;
};

/// Probe one step of u_des with F; keep it when the candidate stays in C_S with margin eps.
FilterOutput rbsf(const FilterConfig & cfg, const Vec & x, const Vec & u_des);
/// Probe one step of u_des then simulate N backup steps; pass when the path stays in C_A and ends in C_b.
FilterOutput sbsf(const FilterConfig & cfg, const Vec & x, const Vec & u_des);
FilterOutput easif(const FilterConfig & cfg, const Vec & x, const Vec & u_des);
FilterOutput iasif(const FilterConfig & cfg, const Vec & x, const Vec & u_des);
FilterOutput rasif(const FilterConfig & cfg, const Vec & x, const Vec & u_des);
FilterOutput mm_asif(const FilterConfig & cfg, const Vec & x, const Vec & u_des);

/// Barrier constraints the ASIF variants would hand to the QP at x (exposed for tests and oracles).
std::vector<LinearConstraint> easif_constraints(const FilterConfig & cfg, const Vec & x);
std::vector<LinearConstraint> iasif_constraints(const FilterConfig & cfg, const Vec & x, SensitivityTrajectory * traj = nullptr);
std::vector<LinearConstraint> rasif_constraints(const FilterConfig & cfg, const Vec & x);

struct PsiGradient
{
  double value{0.0};
  Vec gradient;
  bool valid{false};
  std::string diagnostic;
};

/// Psi and its central-difference gradient with step rel_step * max(1, |x_i|).
PsiGradient psi_with_gradient(const FilterConfig & cfg, const Vec & x, double rel_step = 1e-4);

/// Dispatches on cfg.kind; FilterKind::none passes u_des through the box clamp.
FilterOutput apply_filter(const FilterConfig & cfg, const Vec & x, const Vec & u_des);

/// A filter instance with its latch. Single owner.
class Filter
{
public:
  explicit Filter(FilterConfig cfg);

  FilterOutput step(double t, const Vec & x, const Vec & u_des);
  const LatchState & latch() const { return latch_; }
  const FilterConfig & config() const { return cfg_; }

private:
  FilterConfig cfg_;
  LatchState latch_;
};

}  // namespace rta
