#include "rtakit/simd/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace rta::simd {

bool cpu_has_avx2()
{
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa()
{
  const char * env = std::getenv("RTAKIT_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) { return Isa::scalar; }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

const char * isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

GridBest grid_row_best(const GridRow & row, Isa isa)
{
  if (isa == Isa::avx2 && cpu_has_avx2()) { return detail::grid_row_best_avx2(row); }
  return detail::grid_row_best_scalar(row);
}

void planar_rbsf_min_margin(const PlanarRbsfBatch & cfg, const double * x0, const double * x1, std::size_t count,
  double * min_margin, Isa isa)
{
  if (isa == Isa::avx2 && cpu_has_avx2()) {
    detail::planar_rbsf_avx2(cfg, x0, x1, count, min_margin);
    return;
  }
  detail::planar_rbsf_scalar(cfg, x0, x1, 0, count, min_margin);
}

}  // namespace rta::simd
