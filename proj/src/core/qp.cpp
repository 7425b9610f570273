#include "rtakit/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rta {

void QPSpec::validate() const
{
  const auto m = u_des.size();
  if (m < 1) { throw UsageError("QPSpec: u_des must be nonempty"); }
  if (m > kQpMaxDim) { throw UsageError("QPSpec: input dimension " + std::to_string(m) + " exceeds cap 8"); }
  if (!u_des.allFinite()) { throw UsageError("QPSpec: non-finite u_des"); }
  if (box.dim() != m) { throw UsageError("QPSpec: box dimension differs from u_des"); }
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    const auto & c = constraints[j];
    if (c.a.size() != m) { throw UsageError("QPSpec: constraint " + std::to_string(j) + " has wrong length"); }
    if (!c.a.allFinite() || !std::isfinite(c.b)) { throw UsageError("QPSpec: non-finite constraint coefficients"); }
  }
}

namespace {

/// Constraints in the solver's extended numbering: general ones first, then box faces.
struct Extended
{
  std::vector<Vec> normal;
  std::vector<double> offset;
  std::vector<double> norm;
};

Extended extend(const QPSpec & spec)
{
  const auto m = spec.u_des.size();
  Extended e;
  for (const auto & c : spec.constraints) {
    e.normal.push_back(c.a);
    e.offset.push_back(c.b);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    Vec lo = Vec::Zero(m);
    lo[i]  = 1.0;
    e.normal.push_back(lo);
    e.offset.push_back(-spec.box.lower[i]);
    e.normal.push_back(-lo);
    e.offset.push_back(spec.box.upper[i]);
  }
  for (const auto & a : e.normal) { e.norm.push_back(a.norm()); }
  return e;
}

struct ActiveSet
{
  std::vector<int> idx;
  std::vector<double> lambda;

  Mat normals(const Extended & e, Eigen::Index m) const
  {
    Mat N(m, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) { N.col(static_cast<Eigen::Index>(k)) = e.normal[idx[k]]; }
    return N;
  }

  void drop(std::size_t k)
  {
    idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
    lambda.erase(lambda.begin() + static_cast<std::ptrdiff_t>(k));
  }
};

QPSolution package(const QPSpec & spec, const Extended & e, const ActiveSet & act, Vec u, int iters)
{
  const auto m  = spec.u_des.size();
  const auto nc = spec.constraints.size();
  QPSolution sol;
  sol.status          = QPStatus::optimal;
  sol.u_act           = std::move(u);
  sol.multipliers     = Vec::Zero(static_cast<Eigen::Index>(nc));
  sol.box_multipliers = Vec::Zero(m);
  sol.iterations      = iters;
  for (std::size_t k = 0; k < act.idx.size(); ++k) {
    const int j = act.idx[k];
    // the solver works with 1/2|u - u_des|^2, so the reported multipliers are doubled
    const double lam = 2.0 * act.lambda[k];
    if (j < static_cast<int>(nc)) {
      sol.multipliers[j] = lam;
    } else {
      const int face = j - static_cast<int>(nc);
      sol.box_multipliers[face / 2] += (face % 2 == 0) ? lam : -lam;
    }
  }
  sol.active_indices = act.idx;
  std::sort(sol.active_indices.begin(), sol.active_indices.end());
  (void)e;
  sol.kkt_residual = kkt_residual(spec, sol);
  return sol;
}

QPSolution infeasible(const QPSpec & spec, int blocking, int iters)
{
  QPSolution sol;
  sol.status              = QPStatus::infeasible;
  sol.u_act               = spec.box.clamp(spec.u_des);
  sol.multipliers         = Vec::Zero(static_cast<Eigen::Index>(spec.constraints.size()));
  sol.box_multipliers     = Vec::Zero(spec.u_des.size());
  sol.blocking_constraint = blocking;
  sol.iterations          = iters;
  return sol;
}

/// Re-projects u_des onto the affine hull of the active set to remove accumulated drift.
bool polish(const QPSpec & spec, const Extended & e, ActiveSet & act, Vec & u)
{
  if (act.idx.empty()) {
    u = spec.u_des;
    return true;
  }
  const auto m = spec.u_des.size();
  const Mat N  = act.normals(e, m);
  Vec rhs(N.cols());
  for (Eigen::Index k = 0; k < N.cols(); ++k) { rhs[k] = -e.offset[act.idx[k]] - N.col(k).dot(spec.u_des); }
  const Mat NtN   = N.transpose() * N;
  const Vec lam   = NtN.ldlt().solve(rhs);
  const Vec cand  = spec.u_des + N * lam;
  if (!cand.allFinite() || (lam.array() < -kTolKkt).any()) { return false; }
  for (std::size_t j = 0; j < e.normal.size(); ++j) {
    if (e.normal[j].dot(cand) + e.offset[j] < -kTolFeas) { return false; }
  }
  u = cand;
  for (Eigen::Index k = 0; k < lam.size(); ++k) { act.lambda[k] = std::max(0.0, lam[k]); }
  return true;
}

}  // namespace

QPSolution solve(const QPSpec & spec)
{
  spec.validate();
  const auto m       = spec.u_des.size();
  const Extended e   = extend(spec);
  const int total    = static_cast<int>(e.normal.size());
  const double tiny  = 1e-14;
  int iters          = 0;
  const int max_iter = 50 * (total + 1);

  // a zero normal leaves a constant constraint: either always true or never
  std::vector<bool> ignore(total, false);
  for (int j = 0; j < total; ++j) {
    if (e.norm[j] <= tiny) {
      if (e.offset[j] < -kTolFeas) { return infeasible(spec, j, 0); }
      ignore[j] = true;
    }
  }

  Vec u = spec.u_des;
  ActiveSet act;
  std::vector<bool> in_active(total, false);

  while (true) {
    // most violated constraint by normalized slack; ties go to the lowest index
    int p          = -1;
    double worst   = 0.0;
    for (int j = 0; j < total; ++j) {
      if (ignore[j] || in_active[j]) { continue; }
      const double s = e.normal[j].dot(u) + e.offset[j];
      if (s >= -kTolFeas) { continue; }
      const double v = s / e.norm[j];
      if (p < 0 || v < worst) {
        worst = v;
        p     = j;
      }
    }
    if (p < 0) { break; }

    double lam_p = 0.0;
    while (true) {
      if (++iters > max_iter) { throw NumericError("qp solve: iteration cap reached (cycling)"); }
      const Vec & np = e.normal[p];
      Vec z          = np;
      Vec r;
      if (!act.idx.empty()) {
        const Mat N = act.normals(e, m);
        r           = N.colPivHouseholderQr().solve(np);
        z           = np - N * r;
      }
      const bool dependent = z.norm() <= 1e-12 * e.norm[p];

      // partial step: first active multiplier to hit zero
      double t1 = std::numeric_limits<double>::infinity();
      std::size_t block = 0;
      for (std::size_t k = 0; k < act.idx.size(); ++k) {
        if (r[static_cast<Eigen::Index>(k)] > tiny) {
          const double t = act.lambda[k] / r[static_cast<Eigen::Index>(k)];
          if (t < t1 || (t == t1 && act.idx[k] < act.idx[block])) {
            t1    = t;
            block = k;
          }
        }
      }
      const double sp = np.dot(u) + e.offset[p];
      const double t2 = dependent ? std::numeric_limits<double>::infinity() : -sp / z.dot(np);

      if (!std::isfinite(t1) && !std::isfinite(t2)) { return infeasible(spec, p, iters); }

      const double t = std::min(t1, t2);
      for (std::size_t k = 0; k < act.idx.size(); ++k) { act.lambda[k] -= t * r[static_cast<Eigen::Index>(k)]; }
      lam_p += t;
      if (!dependent) { u += t * z; }

      if (t2 <= t1) {
        act.idx.push_back(p);
        act.lambda.push_back(lam_p);
        in_active[p] = true;
        break;
      }
      in_active[act.idx[block]] = false;
      act.drop(block);
    }
  }

  polish(spec, e, act, u);
  return package(spec, e, act, u, iters);
}

double kkt_residual(const QPSpec & spec, const QPSolution & candidate)
{
  const Vec & u = candidate.u_act;
  const auto m  = spec.u_des.size();
  Vec stat      = 2.0 * (u - spec.u_des);
  double comp   = 0.0;
  for (std::size_t j = 0; j < spec.constraints.size(); ++j) {
    const double lam = candidate.multipliers.size() > 0 ? candidate.multipliers[static_cast<Eigen::Index>(j)] : 0.0;
    const auto & c   = spec.constraints[j];
    stat -= lam * c.a;
    comp += lam * std::abs(c.a.dot(u) + c.b);
  }
  if (candidate.box_multipliers.size() == m) {
    stat -= candidate.box_multipliers;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double mu = candidate.box_multipliers[i];
      comp += mu > 0.0 ? mu * std::abs(u[i] - spec.box.lower[i]) : -mu * std::abs(spec.box.upper[i] - u[i]);
    }
  }
  return stat.norm() + comp;
}

double max_violation(const QPSpec & spec, const Vec & u)
{
  double v = 0.0;
  for (const auto & c : spec.constraints) { v = std::max(v, -(c.a.dot(u) + c.b)); }
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    v = std::max(v, spec.box.lower[i] - u[i]);
    v = std::max(v, u[i] - spec.box.upper[i]);
  }
  return v;
}

}  // namespace rta
