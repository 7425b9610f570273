#pragma once

#include "rtakit/qp.hpp"
#include "rtakit/random.hpp"
#include "rtakit/simd/kernels.hpp"

namespace rta {

struct OracleResult
{
  bool feasible{false};
  Vec u;
  double objective{0.0};
};

/// Exhaustive search over the grid lo + k*resolution in the box (m <= 3). Each grid line along the last axis is
/// solved as an interval, so the scan is exact over the grid.
OracleResult qp_grid_oracle(const QPSpec & spec, double resolution, simd::Isa isa);
inline OracleResult qp_grid_oracle(const QPSpec & spec, double resolution = 1e-3)
{
  return qp_grid_oracle(spec, resolution, simd::active_isa());
}

/// Enumerates active sets of size <= m over constraints and box faces and returns the first KKT point.
OracleResult qp_enumeration_oracle(const QPSpec & spec, double tol = 1e-9);

/// Random QP with m inputs and up to max_constraints general constraints.
QPSpec random_qp_spec(Rng & rng, int m, int max_constraints = 6);

}  // namespace rta
