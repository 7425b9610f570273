// AVX2 variants. Built with -mavx2 only (no FMA) so results match the scalar kernels bit for bit.
#include "rtakit/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

#include <limits>

namespace rta::simd::detail {

namespace {

inline __m256d quad4(const double * c, __m256d a, __m256d b)
{
  __m256d h = _mm256_mul_pd(_mm256_set1_pd(c[0]), _mm256_mul_pd(a, a));
  h         = _mm256_add_pd(h, _mm256_mul_pd(_mm256_set1_pd(c[1]), _mm256_mul_pd(a, b)));
  h         = _mm256_add_pd(h, _mm256_mul_pd(_mm256_set1_pd(c[2]), _mm256_mul_pd(b, b)));
  h         = _mm256_add_pd(h, _mm256_mul_pd(_mm256_set1_pd(c[3]), a));
  h         = _mm256_add_pd(h, _mm256_mul_pd(_mm256_set1_pd(c[4]), b));
  return _mm256_add_pd(h, _mm256_set1_pd(c[5]));
}

// std::max(a, b) returns a unless a < b; _mm256_max_pd(b, a) returns a when either is NaN or a >= b
inline __m256d max4(__m256d a, __m256d b) { return _mm256_blendv_pd(a, b, _mm256_cmp_pd(a, b, _CMP_LT_OQ)); }
inline __m256d min4(__m256d a, __m256d b) { return _mm256_blendv_pd(a, b, _mm256_cmp_pd(b, a, _CMP_LT_OQ)); }

}  // namespace

GridBest grid_row_best_avx2(const GridRow & r)
{
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double kt_s    = std::floor((r.sd - r.s0) / r.hs + 0.5);
  const __m256d kt     = _mm256_set1_pd(kt_s);
  const __m256d kcap   = _mm256_set1_pd(static_cast<double>(r.ns - 1));
  const __m256d zero   = _mm256_setzero_pd();
  const __m256d vinf   = _mm256_set1_pd(inf);
  const __m256d s0     = _mm256_set1_pd(r.s0);
  const __m256d hs     = _mm256_set1_pd(r.hs);
  const __m256d sign   = _mm256_set1_pd(-0.0);
  GridBest best;
  const long full = r.nv - r.nv % 4;
  alignas(32) double obj[4];
  alignas(32) double kk[4];
  alignas(32) double ok[4];
  for (long l = 0; l < full; l += 4) {
    const double lf   = static_cast<double>(l);
    const __m256d idx = _mm256_set_pd(lf + 3.0, lf + 2.0, lf + 1.0, lf);
    const __m256d v   = _mm256_add_pd(_mm256_set1_pd(r.v0), _mm256_mul_pd(idx, _mm256_set1_pd(r.hv)));
    __m256d lo        = _mm256_set1_pd(-inf);
    __m256d hi        = vinf;
    for (int j = 0; j < r.q; ++j) {
      const __m256d off = _mm256_add_pd(_mm256_set1_pd(r.base[j]), _mm256_mul_pd(_mm256_set1_pd(r.slope[j]), v));
      const double c    = r.coef[j];
      if (c > 0.0) {
        lo = max4(lo, _mm256_div_pd(_mm256_xor_pd(off, sign), _mm256_set1_pd(c)));
      } else if (c < 0.0) {
        hi = min4(hi, _mm256_div_pd(_mm256_xor_pd(off, sign), _mm256_set1_pd(c)));
      } else {
        lo = _mm256_blendv_pd(lo, vinf, _mm256_cmp_pd(off, zero, _CMP_LT_OQ));
      }
    }
    const __m256d kmin = max4(_mm256_ceil_pd(_mm256_div_pd(_mm256_sub_pd(lo, s0), hs)), zero);
    const __m256d kmax = min4(_mm256_floor_pd(_mm256_div_pd(_mm256_sub_pd(hi, s0), hs)), kcap);
    const __m256d feas = _mm256_cmp_pd(kmin, kmax, _CMP_LE_OQ);
    const __m256d k    = min4(max4(kt, kmin), kmax);
    const __m256d s    = _mm256_add_pd(s0, _mm256_mul_pd(k, hs));
    const __m256d dv   = _mm256_sub_pd(v, _mm256_set1_pd(r.vd));
    const __m256d ds   = _mm256_sub_pd(s, _mm256_set1_pd(r.sd));
    _mm256_store_pd(obj, _mm256_add_pd(_mm256_mul_pd(dv, dv), _mm256_mul_pd(ds, ds)));
    _mm256_store_pd(kk, k);
    _mm256_store_pd(ok, feas);
    for (int lane = 0; lane < 4; ++lane) {
      if (ok[lane] == 0.0) { continue; }
      if (!best.found || obj[lane] < best.obj) {
        best.found = true;
        best.obj   = obj[lane];
        best.iv    = l + lane;
        best.is    = static_cast<long>(kk[lane]);
      }
    }
  }
  if (full < r.nv) {
    // the scalar tail must see the same v values, so each leftover line gets its own origin
    for (long l = full; l < r.nv; ++l) {
      GridRow one = r;
      one.nv      = 1;
      one.v0      = r.v0 + static_cast<double>(l) * r.hv;
      one.hv      = 0.0;
      const GridBest b = grid_row_best_scalar(one);
      if (b.found && (!best.found || b.obj < best.obj)) {
        best.found = true;
        best.obj   = b.obj;
        best.iv    = l;
        best.is    = b.is;
      }
    }
  }
  return best;
}

void planar_rbsf_avx2(const PlanarRbsfBatch & c, const double * x0, const double * x1, std::size_t count, double * out)
{
  const std::size_t full = count - count % 4;
  const __m256d ud       = _mm256_set1_pd(c.u_des);
  const __m256d eps      = _mm256_set1_pd(c.eps);
  const __m256d ulo      = _mm256_set1_pd(c.u_lo);
  const __m256d uhi      = _mm256_set1_pd(c.u_hi);
  for (std::size_t i = 0; i < full; i += 4) {
    __m256d a  = _mm256_loadu_pd(x0 + i);
    __m256d b  = _mm256_loadu_pd(x1 + i);
    __m256d mn = quad4(c.constraint, a, b);
    for (int t = 0; t < c.ticks; ++t) {
      __m256d ca = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(c.Ad[0]), a), _mm256_mul_pd(_mm256_set1_pd(c.Ad[1]), b));
      ca         = _mm256_add_pd(ca, _mm256_mul_pd(_mm256_set1_pd(c.Bd[0]), ud));
      __m256d cb = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(c.Ad[2]), a), _mm256_mul_pd(_mm256_set1_pd(c.Ad[3]), b));
      cb         = _mm256_add_pd(cb, _mm256_mul_pd(_mm256_set1_pd(c.Bd[1]), ud));
      const __m256d pass = _mm256_cmp_pd(quad4(c.safe, ca, cb), eps, _CMP_GE_OQ);
      __m256d ub = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(c.K[0]), a), _mm256_mul_pd(_mm256_set1_pd(c.K[1]), b));
      ub         = _mm256_add_pd(ub, _mm256_set1_pd(c.k0));
      ub         = min4(max4(ub, ulo), uhi);
      const __m256d u = _mm256_blendv_pd(ub, ud, pass);
      for (int s = 0; s < c.substeps; ++s) {
        __m256d na = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(c.M[0]), a), _mm256_mul_pd(_mm256_set1_pd(c.M[1]), b));
        na         = _mm256_add_pd(na, _mm256_mul_pd(_mm256_set1_pd(c.N[0]), u));
        __m256d nb = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(c.M[2]), a), _mm256_mul_pd(_mm256_set1_pd(c.M[3]), b));
        nb         = _mm256_add_pd(nb, _mm256_mul_pd(_mm256_set1_pd(c.N[1]), u));
        a          = na;
        b          = nb;
        mn         = min4(mn, quad4(c.constraint, a, b));
      }
    }
    _mm256_storeu_pd(out + i, mn);
  }
  planar_rbsf_scalar(c, x0, x1, full, count, out);
}

}  // namespace rta::simd::detail
