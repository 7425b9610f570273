// Reference kernels. Compiled with -ffp-contract=off so every operation rounds exactly as in the AVX2 variants.
#include "rtakit/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rta::simd::detail {

namespace {

inline double quad(const double * c, double a, double b)
{
  return c[0] * (a * a) + c[1] * (a * b) + c[2] * (b * b) + c[3] * a + c[4] * b + c[5];
}

}  // namespace

GridBest grid_row_best_scalar(const GridRow & r)
{
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double kt      = std::floor((r.sd - r.s0) / r.hs + 0.5);
  const double kcap    = static_cast<double>(r.ns - 1);
  GridBest best;
  for (long l = 0; l < r.nv; ++l) {
    const double v = r.v0 + static_cast<double>(l) * r.hv;
    double lo      = -inf;
    double hi      = inf;
    for (int j = 0; j < r.q; ++j) {
      const double off = r.base[j] + r.slope[j] * v;
      const double c   = r.coef[j];
      if (c > 0.0) {
        lo = std::max(lo, -off / c);
      } else if (c < 0.0) {
        hi = std::min(hi, -off / c);
      } else if (off < 0.0) {
        lo = inf;
      }
    }
    const double kmin = std::max(std::ceil((lo - r.s0) / r.hs), 0.0);
    const double kmax = std::min(std::floor((hi - r.s0) / r.hs), kcap);
    if (!(kmin <= kmax)) { continue; }
    const double k   = std::min(std::max(kt, kmin), kmax);
    const double s   = r.s0 + k * r.hs;
    const double dv  = v - r.vd;
    const double ds  = s - r.sd;
    const double obj = dv * dv + ds * ds;
    if (!best.found || obj < best.obj) {
      best.found = true;
      best.obj   = obj;
      best.iv    = l;
      best.is    = static_cast<long>(k);
    }
  }
  return best;
}

void planar_rbsf_scalar(const PlanarRbsfBatch & c, const double * x0, const double * x1, std::size_t begin,
  std::size_t end, double * out)
{
  for (std::size_t i = begin; i < end; ++i) {
    double a  = x0[i];
    double b  = x1[i];
    double mn = quad(c.constraint, a, b);
    for (int t = 0; t < c.ticks; ++t) {
      const double ca = c.Ad[0] * a + c.Ad[1] * b + c.Bd[0] * c.u_des;
      const double cb = c.Ad[2] * a + c.Ad[3] * b + c.Bd[1] * c.u_des;
      double u        = c.u_des;
      if (!(quad(c.safe, ca, cb) >= c.eps)) {
        const double ub = c.K[0] * a + c.K[1] * b + c.k0;
        u               = std::min(std::max(ub, c.u_lo), c.u_hi);
      }
      for (int s = 0; s < c.substeps; ++s) {
        const double na = c.M[0] * a + c.M[1] * b + c.N[0] * u;
        const double nb = c.M[2] * a + c.M[3] * b + c.N[1] * u;
        a               = na;
        b               = nb;
        mn              = std::min(mn, quad(c.constraint, a, b));
      }
    }
    out[i] = mn;
  }
}

}  // namespace rta::simd::detail
