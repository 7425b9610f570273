#pragma once

#include <cstddef>

namespace rta::simd {

enum class Isa { scalar, avx2 };

/// AVX2 when the CPU supports it, unless RTAKIT_SIMD=scalar is set.
Isa active_isa();
bool cpu_has_avx2();
const char * isa_name(Isa isa);

/// One row of a dense grid scan over a box for constraints of the form
///   coef_j * s + (base_j + slope_j * v) >= 0,
/// where v runs over v0 + l*hv (l < nv) and s over s0 + k*hs (k < ns).
struct GridRow
{
  int q{0};
  const double * base{nullptr};
  const double * slope{nullptr};
  const double * coef{nullptr};
  double v0{0.0};
  double hv{0.0};
  long nv{1};
  double s0{0.0};
  double hs{1.0};
  long ns{1};
  double vd{0.0};
  double sd{0.0};
};

/// Best grid point of a row: minimal (v - vd)^2 + (s - sd)^2, ties to the lowest v index.
struct GridBest
{
  bool found{false};
  double obj{0.0};
  long iv{0};
  long is{0};
};

GridBest grid_row_best(const GridRow & row, Isa isa);
inline GridBest grid_row_best(const GridRow & row) { return grid_row_best(row, active_isa()); }

/// Planar linear plant under a region-based Simplex filter with a constant desired input and an affine
/// backup law, rolled out for a batch of initial states. All matrices are row-major.
struct PlanarRbsfBatch
{
  double Ad[4]{};  // probe map over one tick
  double Bd[2]{};
  double M[4]{};   // one integrator substep (RK4 of the linear field, as a matrix)
  double N[2]{};
  int substeps{10};
  int ticks{0};
  double u_des{0.0};
  double u_lo{-1.0};
  double u_hi{1.0};
  double K[2]{};
  double k0{0.0};
  /// Quadratic h = S0 x0^2 + S1 x0 x1 + S2 x1^2 + S3 x0 + S4 x1 + S5.
  double safe[6]{};
  double constraint[6]{};
  double eps{0.0};
};

/// Writes the minimum constraint value seen over all substeps (including the initial state).
void planar_rbsf_min_margin(const PlanarRbsfBatch & cfg, const double * x0, const double * x1, std::size_t count,
  double * min_margin, Isa isa);
inline void planar_rbsf_min_margin(
  const PlanarRbsfBatch & cfg, const double * x0, const double * x1, std::size_t count, double * min_margin)
{
  planar_rbsf_min_margin(cfg, x0, x1, count, min_margin, active_isa());
}

namespace detail {
GridBest grid_row_best_scalar(const GridRow & row);
GridBest grid_row_best_avx2(const GridRow & row);
void planar_rbsf_scalar(const PlanarRbsfBatch & cfg, const double * x0, const double * x1, std::size_t begin,
  std::size_t end, double * out);
void planar_rbsf_avx2(const PlanarRbsfBatch & cfg, const double * x0, const double * x1, std::size_t count, double * out);
}  // namespace detail

}  // namespace rta::simd
