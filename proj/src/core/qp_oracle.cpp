#include "rtakit/qp_oracle.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace rta {

namespace {

double objective(const QPSpec & spec, const Vec & u) { return (u - spec.u_des).squaredNorm(); }

long grid_count(double lo, double hi, double h) { return static_cast<long>(std::floor((hi - lo) / h + 1e-9)) + 1; }

}  // namespace

OracleResult qp_grid_oracle(const QPSpec & spec, double resolution, simd::Isa isa)
{
  spec.validate();
  const auto m = spec.u_des.size();
  if (m > 3) { throw UsageError("qp_grid_oracle: supports m <= 3"); }
  const int q = static_cast<int>(spec.constraints.size());
  const Vec & lo = spec.box.lower;
  const Vec & hi = spec.box.upper;
  const Vec & ud = spec.u_des;
  const double h = resolution;
  const auto last = m - 1;

  std::vector<double> base(q);
  std::vector<double> slope(q);
  std::vector<double> coef(q);
  for (int j = 0; j < q; ++j) { coef[j] = spec.constraints[j].a[last]; }

  simd::GridRow row;
  row.q     = q;
  row.base  = base.data();
  row.slope = slope.data();
  row.coef  = coef.data();
  row.s0    = lo[last];
  row.hs    = h;
  row.ns    = grid_count(lo[last], hi[last], h);
  row.sd    = ud[last];

  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();

  if (m == 1) {
    for (int j = 0; j < q; ++j) {
      base[j]  = spec.constraints[j].b;
      slope[j] = 0.0;
    }
    row.v0 = 0.0;
    row.hv = 0.0;
    row.nv = 1;
    row.vd = 0.0;
    const auto b = simd::grid_row_best(row, isa);
    if (b.found) {
      best.feasible  = true;
      best.u         = Vec::Constant(1, lo[0] + static_cast<double>(b.is) * h);
      best.objective = objective(spec, best.u);
    }
    return best;
  }

  // the varying axis of each row is m-2; for m == 3 the outer loop walks axis 0
  const auto vax   = m - 2;
  row.v0           = lo[vax];
  row.hv           = h;
  row.nv           = grid_count(lo[vax], hi[vax], h);
  row.vd           = ud[vax];
  const long outer = m == 3 ? grid_count(lo[0], hi[0], h) : 1;
  for (long o = 0; o < outer; ++o) {
    const double u0 = m == 3 ? lo[0] + static_cast<double>(o) * h : 0.0;
    for (int j = 0; j < q; ++j) {
      const auto & a = spec.constraints[j].a;
      base[j]        = spec.constraints[j].b + (m == 3 ? a[0] * u0 : 0.0);
      slope[j]       = a[vax];
    }
    const auto b = simd::grid_row_best(row, isa);
    if (!b.found) { continue; }
    const double d0  = m == 3 ? u0 - ud[0] : 0.0;
    const double obj = d0 * d0 + b.obj;
    if (obj < best.objective) {
      best.feasible  = true;
      best.objective = obj;
      best.u         = Vec(m);
      if (m == 3) { best.u[0] = u0; }
      best.u[vax]  = lo[vax] + static_cast<double>(b.iv) * h;
      best.u[last] = lo[last] + static_cast<double>(b.is) * h;
    }
  }
  if (best.feasible) { best.objective = objective(spec, best.u); }
  return best;
}

OracleResult qp_enumeration_oracle(const QPSpec & spec, double tol)
{
  spec.validate();
  const auto m = spec.u_des.size();
  std::vector<Vec> normal;
  std::vector<double> offset;
  for (const auto & c : spec.constraints) {
    normal.push_back(c.a);
    offset.push_back(c.b);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    Vec e  = Vec::Zero(m);
    e[i]   = 1.0;
    normal.push_back(e);
    offset.push_back(-spec.box.lower[i]);
    normal.push_back(-e);
    offset.push_back(spec.box.upper[i]);
  }
  const int total = static_cast<int>(normal.size());

  const auto feasible = [&](const Vec & u) {
    for (int j = 0; j < total; ++j) {
      if (normal[j].dot(u) + offset[j] < -tol * std::max(1.0, normal[j].norm())) { return false; }
    }
    return true;
  };

  OracleResult out;
  std::vector<int> subset;
  // depth-first enumeration of index subsets in lexicographic order
  const std::function<bool(int)> visit = [&](int start) -> bool {
    const auto k = static_cast<Eigen::Index>(subset.size());
    Vec u        = spec.u_des;
    Vec lam;
    bool ok = true;
    if (k > 0) {
      Mat N(m, k);
      Vec rhs(k);
      for (Eigen::Index c = 0; c < k; ++c) {
        N.col(c) = normal[subset[c]];
        rhs[c]   = -offset[subset[c]] - normal[subset[c]].dot(spec.u_des);
      }
      Eigen::ColPivHouseholderQR<Mat> qr(N);
      if (qr.rank() < k) {
        ok = false;
      } else {
        const Mat NtN = N.transpose() * N;
        lam           = NtN.ldlt().solve(rhs);
        u             = spec.u_des + N * lam;
        ok            = (lam.array() >= -tol).all();
      }
    }
    if (ok && feasible(u)) {
      out.feasible  = true;
      out.u         = u;
      out.objective = objective(spec, u);
      return true;
    }
    if (k == m) { return false; }
    for (int j = start; j < total; ++j) {
      subset.push_back(j);
      if (visit(j + 1)) { return true; }
      subset.pop_back();
    }
    return false;
  };
  visit(0);
  return out;
}

QPSpec random_qp_spec(Rng & rng, int m, int max_constraints)
{
  QPSpec spec;
  spec.u_des = Vec(m);
  Vec lo(m);
  Vec hi(m);
  for (int i = 0; i < m; ++i) {
    spec.u_des[i] = rng.uniform(-1.5, 1.5);
    lo[i]         = rng.uniform(-1.0, -0.05);
    hi[i]         = rng.uniform(0.05, 1.0);
  }
  spec.box     = Box(lo, hi);
  const auto q = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_constraints + 1));
  for (int j = 0; j < q; ++j) {
    Vec a(m);
    for (int i = 0; i < m; ++i) { a[i] = rng.normal(); }
    spec.constraints.push_back({a, rng.uniform(-1.0, 1.0)});
  }
  return spec;
}

}  // namespace rta
