#pragma once

#include "rtakit/types.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rta {

using ParamMap = std::map<std::string, double>;

/// u = K x + k0.
struct AffineCoefficients
{
  Mat K;
  Vec k0;
};

/// A state-feedback law u = k(x), optionally with its analytic Jacobian dk/dx.
struct FeedbackLaw
{
  std::string name;
  std::function<Vec(const Vec &)> eval;
  /// Empty when no analytic Jacobian is registered.
  std::function<Mat(const Vec &)> jacobian;
  /// False for laws with kinks (hard clamps, switches); such laws cannot drive sensitivity integration.
  bool smooth{true};
  /// Set by constant_law / affine_law so batch kernels can recognise the law.
  std::optional<AffineCoefficients> affine;

  Vec operator()(const Vec & x) const { return eval(x); }
};

FeedbackLaw constant_law(Vec u, std::string name = "constant");
FeedbackLaw affine_law(Mat K, Vec k0, std::string name = "affine");

/// x' = A x + B u, declared by plants whose drift and input map are linear.
struct LinearStructure
{
  Mat A;
  Mat B;
};

/// Control-affine plant x' = f(x) + g(x) u with admissible inputs u_box.
struct ContinuousAffinePlant
{
  std::string name;
  int n{0};
  int m{0};
  std::function<Vec(const Vec &)> f;
  std::function<Mat(const Vec &)> g;
  /// Optional analytic df/dx.
  std::function<Mat(const Vec &)> f_jacobian;
  /// True when g does not depend on x; lets the closed-loop Jacobian be assembled analytically.
  bool g_constant{false};
  /// Optional non-affine term r(x, u) added to f + g u (CWH fuel burn). Ignored by Jacobian-based filters.
  std::function<Vec(const Vec &, const Vec &)> nonaffine;
  Box u_box;
  std::optional<LinearStructure> linear;
  ParamMap params;

  double param(const std::string & key) const;
};

/// x' = f(x) + g1(x) u + g2(x) w with w in the hyperrectangle w_box.
struct NondetAffinePlant
{
  ContinuousAffinePlant nominal;
  int p{0};
  std::function<Mat(const Vec &)> g2;
  Box w_box;
};

enum class Discretization { exact_zoh_linear, rk4 };

/// One-controller-period state update x+ = F(x, u).
struct DiscretePlant
{
  int n{0};
  int m{0};
  double dt{0.0};
  Discretization provenance{Discretization::rk4};
  std::function<Vec(const Vec &, const Vec &)> F;

  Vec step(const Vec & x, const Vec & u) const { return F(x, u); }
};

Vec eval_dynamics(const ContinuousAffinePlant & plant, const Vec & x, const Vec & u);
Vec eval_nondet(const NondetAffinePlant & plant, const Vec & x, const Vec & u, const Vec & w);

/// Drift of the closed loop x' = f(x) + g(x) k(x).
Vec eval_closed_loop(const ContinuousAffinePlant & plant, const FeedbackLaw & law, const Vec & x);

/// Discretize with u held over dt. rk4 uses `substeps` classical RK4 steps of dt/substeps.
DiscretePlant discretize(const ContinuousAffinePlant & plant, double dt, Discretization method, int substeps = 1);

enum class SaturationMode { hard, tanh, rational };

/// Componentwise saturation into `box`; smooth modes are the unit formulas mapped through the box
/// center and half-width.
Vec saturate(const Vec & u, const Box & box, SaturationMode mode);

/// d/du of the smooth saturation (diagonal entries); hard mode returns 1 inside and 0 outside.
Vec saturate_derivative(const Vec & u, const Box & box, SaturationMode mode);

/// Jacobian of x -> f(x) + g(x) k(x). Analytic when the plant provides df/dx, g is constant and the
/// law has a Jacobian; central differences with step 1e-6*max(1,|x_i|) otherwise.
Mat closed_loop_jacobian(const ContinuousAffinePlant & plant, const FeedbackLaw & law, const Vec & x);

/// Central-difference Jacobian of an arbitrary vector field.
Mat finite_difference_jacobian(const std::function<Vec(const Vec &)> & fn, const Vec & x, double rel_step = 1e-6);

using PlantModel = std::variant<ContinuousAffinePlant, NondetAffinePlant>;

/// Catalog of worked systems. Unknown names and invalid parameters raise UsageError.
PlantModel make_plant(const std::string & name, const ParamMap & params = {});

/// Convenience wrappers that insist on the deterministic / nondeterministic alternative.
ContinuousAffinePlant make_continuous_plant(const std::string & name, const ParamMap & params = {});
NondetAffinePlant make_nondet_plant(const std::string & name, const ParamMap & params = {});

const std::vector<std::string> & plant_names();

/// Rigid-body detumbling law u = tanh((x x Jx) - k_d J x) with its analytic Jacobian.
FeedbackLaw rigid_body_backup_law(const ContinuousAffinePlant & rigid_body);

/// Skew-symmetric matrix with skew(a) b = a x b.
Eigen::Matrix3d skew(const Eigen::Vector3d & a);

}  // namespace rta
