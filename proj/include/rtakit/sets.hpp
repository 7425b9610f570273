#pragma once

#include "rtakit/dynamics.hpp"
#include "rtakit/integration.hpp"
#include "rtakit/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rta {

enum class SetRole { constraint, safe, backup };

/// h(x) = x'Px + q'x + c. Carried by sets that have this closed form so batch kernels can use it.
struct QuadraticForm
{
  Mat P;
  Vec q;
  double c{0.0};

  double eval(const Vec & x) const { return x.dot(P * x) + q.dot(x) + c; }
  Vec grad(const Vec & x) const { return (P + P.transpose()) * x + q; }
};

/// {x | h(x) >= 0}.
struct LevelSet
{
  std::string name;
  SetRole role{SetRole::constraint};
  int n{0};
  std::function<double(const Vec &)> h;
  /// Optional analytic gradient.
  std::function<Vec(const Vec &)> grad;
  bool smooth{true};
  std::optional<QuadraticForm> quadratic;

  double margin(const Vec & x) const;
  /// Analytic gradient when registered, central differences otherwise.
  Vec gradient(const Vec & x) const;
  bool contains(const Vec & x) const { return margin(x) >= 0.0; }
};

LevelSet make_level_set(std::string name, SetRole role, int n, std::function<double(const Vec &)> h,
  std::function<Vec(const Vec &)> grad = {}, bool smooth = true);
LevelSet quadratic_set(std::string name, SetRole role, QuadraticForm form);

/// Conjunction of level sets; the margin is the smallest member margin.
struct IntersectionSet
{
  std::vector<LevelSet> members;

  IntersectionSet() = default;
  IntersectionSet(LevelSet single) { members.push_back(std::move(single)); }  // NOLINT(google-explicit-constructor)
  IntersectionSet(std::vector<LevelSet> sets) : members(std::move(sets)) {}   // NOLINT(google-explicit-constructor)

  bool empty() const { return members.empty(); }
  int dim() const { return members.empty() ? 0 : members.front().n; }
  double margin(const Vec & x) const;
  bool contains(const Vec & x) const { return margin(x) >= 0.0; }
  bool smooth() const;
};

double margin(const LevelSet & set, const Vec & x);
double margin(const IntersectionSet & set, const Vec & x);

// Worked-example sets.

/// Largest control-invariant subset of {x1 <= 0} for the double integrator with |u| <= 1.
double double_integrator_viability_h(const Vec & x);
/// -2 x1 - x2^2, the smooth inner barrier.
double double_integrator_viability_h_smooth(const Vec & x);
LevelSet double_integrator_constraint();
LevelSet double_integrator_viability();
LevelSet double_integrator_viability_smooth(double a = 1.0);
/// {-x1 >= 0} and {-x2 >= 0}.
IntersectionSet double_integrator_backup();

/// c - x'Px.
double quadratic_level_h(const Vec & x, const Mat & P, double c);
Mat mass_spring_damper_lyapunov();
LevelSet mass_spring_damper_safe_set(double c = 1.0);
/// |x1| <= 1 and |x2| <= 1 as four members.
IntersectionSet mass_spring_damper_constraint();

double unicycle_safe_h(const Vec & x);
LevelSet unicycle_safe_set();
/// x1 >= 0 (the obstacle boundary).
LevelSet unicycle_constraint();

/// x1^2 + x2^2 - r_min^2 on the 5-state CWH vector.
LevelSet cwh_constraint(double r_min);
enum class CwhBackup { invariant_points, nmt_subspace };
bool cwh_backup_membership(const Vec & x, CwhBackup which, double r_min, double mean_motion, double tol);

/// omega_max^2 - |x|^2.
LevelSet rigid_body_constraint(double omega_max);
/// K - x'Jx with K = omega_max^2 * min(J), the largest such ellipsoid inside the constraint ball.
LevelSet rigid_body_backup_set(const Eigen::Vector3d & J, double omega_max);
double rigid_body_backup_level(const Eigen::Vector3d & J, double omega_max);

/// Separation x3 - x1 >= 0.
LevelSet two_cart_constraint();

/// Safe backward image: states whose backup flow stays in C_A and ends in C_b.
struct SafeBackwardImageSpec
{
  IntersectionSet constraint;
  IntersectionSet backup_set;
  FeedbackLaw backup;
  double horizon{1.0};
  int samples{1};
  double eps1{1e-3};
  double eps2{1e-3};

  void validate() const;
};

struct SbiResult
{
  bool member{false};
  Trajectory witness;
  double path_margin{0.0};
  double terminal_margin{0.0};
  std::string diagnostic;
};

SbiResult sbi_membership(const SafeBackwardImageSpec & spec, const ContinuousAffinePlant & plant, const Vec & x);

inline constexpr double kTolNagumo = 1e-8;

struct NagumoViolation
{
  Vec x;
  double hdot{0.0};
};

struct NagumoReport
{
  int sampled{0};
  int skipped_rays{0};
  double min_hdot{0.0};
  std::vector<NagumoViolation> violations;

  bool passed() const { return violations.empty(); }
};

/// Samples boundary points by bisection along random rays from `interior` and checks grad h . F_cl >= -tol.
NagumoReport nagumo_boundary_check(const ContinuousAffinePlant & plant, const FeedbackLaw & law, const LevelSet & set,
  const Vec & interior, int n_samples, std::uint64_t seed, double tol = kTolNagumo);

}  // namespace rta
