#pragma once

#include "rtakit/types.hpp"

#include <vector>

namespace rta {

inline constexpr int kQpMaxDim   = 8;
inline constexpr double kTolFeas = 1e-9;
inline constexpr double kTolKkt  = 1e-8;

/// a'u + b >= 0.
struct LinearConstraint
{
  Vec a;
  double b{0.0};
};

/// min |u - u_des|^2 subject to the linear constraints and u in box.
struct QPSpec
{
  Vec u_des;
  std::vector<LinearConstraint> constraints;
  Box box;

  void validate() const;
};

enum class QPStatus { optimal, infeasible };

struct QPSolution
{
  Vec u_act;
  QPStatus status{QPStatus::infeasible};
  /// Indices into spec.constraints; box faces are reported as constraints.size() + 2i (lower) and + 2i + 1 (upper).
  std::vector<int> active_indices;
  /// One nonnegative multiplier per general constraint (zero when inactive).
  Vec multipliers;
  /// Signed box multipliers: lower-face multiplier minus upper-face multiplier.
  Vec box_multipliers;
  double kkt_residual{0.0};
  /// For infeasible returns, the constraint (in the extended numbering) that could not be added.
  int blocking_constraint{-1};
  int iterations{0};

  bool optimal() const { return status == QPStatus::optimal; }
};

/// Dual active-set solve (Goldfarb-Idnani with identity Hessian).
QPSolution solve(const QPSpec & spec);

/// |2(u - u_des) - sum lambda_i a_i - mu_box| + sum lambda_i |a_i'u + b_i| + box complementarity.
double kkt_residual(const QPSpec & spec, const QPSolution & candidate);

/// Largest violation max(0, -(a'u + b)) over all constraints and box faces.
double max_violation(const QPSpec & spec, const Vec & u);

}  // namespace rta
