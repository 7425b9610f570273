#include "rtakit/mm_reach.hpp"

#include "rtakit/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rta {

Vec EmbeddingSystem::operator()(const Vec & x, const Vec & xh) const
{
  Vec s(2 * n);
  s << x, xh;
  return E(s);
}

namespace {

template <class V>
std::vector<Vec> corners_of(const V & lo, const V & hi)
{
  const auto n = lo.size();
  if (n > kMaxCornerDim) { throw UsageError("corners: dimension " + std::to_string(n) + " exceeds cap 12"); }
  const std::size_t count = std::size_t{1} << n;
  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    Vec z(n);
    for (Eigen::Index i = 0; i < n; ++i) { z[i] = ((c >> i) & 1U) ? hi[i] : lo[i]; }
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace

std::vector<Vec> corners(const Hyperrectangle & rect) { return corners_of(rect.lower, rect.upper); }
std::vector<Vec> corners(const Box & box) { return corners_of(box.lower, box.upper); }

EmbeddingSystem build_embedding(const DecompositionFunction & d, const Box & w_box)
{
  if (w_box.dim() != d.p) { throw UsageError("build_embedding: disturbance box has wrong dimension"); }
  EmbeddingSystem e;
  e.n = d.n;
  e.E = [d, wl = w_box.lower, wu = w_box.upper](const Vec & s) -> Vec {
    const Vec x  = s.head(d.n);
    const Vec xh = s.tail(d.n);
    Vec out(2 * d.n);
    out << d.d(x, wl, xh, wu), d.d(xh, wu, x, wl);
    return out;
  };
  return e;
}

Hyperrectangle reach_overapprox(
  const DecompositionFunction & d, const Box & w_box, const Hyperrectangle & rect0, double t, double dt)
{
  require_dim(rect0.lower, d.n, "reach_overapprox: initial rectangle");
  const auto traj = flow_embedding(build_embedding(d, w_box).E, rect0, t, dt);
  if (traj.stacked.blew_up) { throw NumericError("reach_overapprox: embedding blew up: " + traj.stacked.diagnostic); }
  if (!traj.order_preserved()) {
    throw NumericError("reach_overapprox: embedding order inverted at t=" + std::to_string(traj.first_inversion_time));
  }
  return traj.terminal();
}

double lse(const std::vector<double> & values, double p)
{
  if (values.empty()) { throw UsageError("lse: empty list"); }
  if (!(p > 0.0)) { throw UsageError("lse: p must be positive"); }
  const double lo = *std::min_element(values.begin(), values.end());
  if (!std::isfinite(lo)) { throw NumericError("lse: non-finite value"); }
  double acc = 0.0;
  for (double s : values) { acc += std::exp(-p * (s - lo)); }
  return lo - std::log(acc) / p;
}

namespace {

void append_corner_values(const IntersectionSet & h, const Hyperrectangle & rect, std::vector<double> & out)
{
  const auto cs = corners(rect);
  for (const auto & member : h.members) {
    for (const auto & z : cs) { out.push_back(member.margin(z)); }
  }
}

}  // namespace

double lse_h(const IntersectionSet & h, const Hyperrectangle & rect, double p)
{
  std::vector<double> vals;
  append_corner_values(h, rect, vals);
  return lse(vals, p);
}

PsiResult psi(const IntersectionSet & h_b, const DecompositionFunction & d, const Box & w_box, const Vec & x,
  const PsiOptions & opt)
{
  require_dim(x, d.n, "psi: state");
  PsiResult r;
  const auto traj = flow_embedding(build_embedding(d, w_box).E, Hyperrectangle::point(x), opt.horizon, opt.dt);
  if (traj.stacked.blew_up || !traj.order_preserved()) {
    r.value      = -std::numeric_limits<double>::infinity();
    r.inverted   = true;
    r.diagnostic = traj.stacked.blew_up ? "embedding blew up: " + traj.stacked.diagnostic
                                        : "embedding order inverted at t=" + std::to_string(traj.first_inversion_time);
    return r;
  }
  r.value = -std::numeric_limits<double>::infinity();
  std::vector<double> path;
  std::vector<double> vals;
  for (std::size_t k = 0; k < traj.stacked.size(); ++k) {
    const Hyperrectangle rect = traj.rect(k);
    if (opt.path_constraint != nullptr) { append_corner_values(*opt.path_constraint, rect, path); }
    vals = path;
    append_corner_values(h_b, rect, vals);
    const double g = lse(vals, opt.p);
    if (g > r.value) {
      r.value       = g;
      r.argmax_time = traj.stacked.times[k];
    }
  }
  return r;
}

DecompositionReport validate_decomposition(const DecompositionFunction & d, const Box & state_box, const Box & w_box,
  int samples, std::uint64_t seed, double tol)
{
  if (state_box.dim() != d.n || w_box.dim() != d.p) { throw UsageError("validate_decomposition: box dimensions"); }
  Rng rng(seed);
  DecompositionReport rep;
  const auto draw = [&rng](const Box & b) {
    Vec v(b.dim());
    for (Eigen::Index i = 0; i < b.dim(); ++i) { v[i] = rng.uniform(b.lower[i], b.upper[i]); }
    return v;
  };
  const auto fail = [&rep](const std::string & msg) {
    if (rep.failures.size() < 20) { rep.failures.push_back(msg); }
  };
  // derivative of d_i along one argument slot by central differences
  const auto partial = [&d](Vec x, Vec w, Vec xh, Vec wh, int slot, Eigen::Index j) {
    Vec * args[4] = {&x, &w, &xh, &wh};
    Vec & v       = *args[slot];
    const double h0 = v[j];
    const double h  = 1e-6 * std::max(1.0, std::abs(h0));
    v[j]            = h0 + h;
    const Vec fp    = d.d(x, w, xh, wh);
    v[j]            = h0 - h;
    const Vec fm    = d.d(x, w, xh, wh);
    return Vec((fp - fm) / (2.0 * h));
  };

  for (int s = 0; s < samples; ++s) {
    const Vec x  = draw(state_box);
    const Vec xh = draw(state_box);
    const Vec w  = draw(w_box);
    const Vec wh = draw(w_box);
    ++rep.samples;

    const double diag = (d.d(x, w, x, w) - d.F(x, w)).lpNorm<Eigen::Infinity>();
    rep.worst_diagonal = std::max(rep.worst_diagonal, diag);
    if (diag > tol) { fail("diagonal condition violated by " + std::to_string(diag)); }

    for (Eigen::Index j = 0; j < d.n; ++j) {
      const Vec dx  = partial(x, w, xh, wh, 0, j);
      const Vec dxh = partial(x, w, xh, wh, 2, j);
      for (Eigen::Index i = 0; i < d.n; ++i) {
        if (i != j) {
          rep.worst_sign = std::max(rep.worst_sign, -dx[i]);
          if (dx[i] < -tol) { fail("d" + std::to_string(i) + "/dx" + std::to_string(j) + " < 0"); }
        }
        rep.worst_sign = std::max(rep.worst_sign, dxh[i]);
        if (dxh[i] > tol) { fail("d" + std::to_string(i) + "/dxhat" + std::to_string(j) + " > 0"); }
      }
    }
    for (Eigen::Index j = 0; j < d.p; ++j) {
      const Vec dw  = partial(x, w, xh, wh, 1, j);
      const Vec dwh = partial(x, w, xh, wh, 3, j);
      for (Eigen::Index i = 0; i < d.n; ++i) {
        rep.worst_sign = std::max({rep.worst_sign, -dw[i], dwh[i]});
        if (dw[i] < -tol) { fail("d" + std::to_string(i) + "/dw" + std::to_string(j) + " < 0"); }
        if (dwh[i] > tol) { fail("d" + std::to_string(i) + "/dwhat" + std::to_string(j) + " > 0"); }
      }
    }
  }
  return rep;
}

ContainmentReport monte_carlo_containment(const DecompositionFunction & d, const Box & w_box,
  const Hyperrectangle & rect0, double t, double dt, int samples, std::uint64_t seed, double hold)
{
  ContainmentReport rep;
  rep.over = reach_overapprox(d, w_box, rect0, t, dt);
  Rng rng(seed);
  Vec hull_lo = Vec::Constant(d.n, std::numeric_limits<double>::infinity());
  Vec hull_hi = -hull_lo;
  const auto grid = sample_grid(t, dt);
  for (int s = 0; s < samples; ++s) {
    Vec x(d.n);
    for (int i = 0; i < d.n; ++i) { x[i] = rng.uniform(rect0.lower[i], rect0.upper[i]); }
    Vec w(d.p);
    double next_switch = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
      if (grid[k - 1] >= next_switch - 1e-12) {
        for (int i = 0; i < d.p; ++i) { w[i] = rng.uniform(w_box.lower[i], w_box.upper[i]); }
        next_switch += hold;
      }
      x = rk4_step([&](const Vec & z) { return d.F(z, w); }, x, grid[k] - grid[k - 1]);
    }
    ++rep.samples;
    if (rep.over.contains(x, 1e-9)) { ++rep.contained; }
    hull_lo = hull_lo.cwiseMin(x);
    hull_hi = hull_hi.cwiseMax(x);
  }
  rep.hull = Hyperrectangle(hull_lo, hull_hi);
  return rep;
}

DecompositionFunction mm_example_decomposition()
{
  DecompositionFunction d;
  d.name = "mm_example";
  d.n    = 2;
  d.p    = 0;
  d.d    = [](const Vec & x, const Vec &, const Vec & xh, const Vec &) -> Vec {
    double d1;
    if (x[1] >= std::max(0.0, -xh[1])) {
      d1 = x[1] * x[1] + 2.0;
    } else if (xh[1] <= std::min(0.0, -x[1])) {
      d1 = xh[1] * xh[1] + 2.0;
    } else {
      d1 = 2.0;
    }
    return Eigen::Vector2d(d1, x[0]);
  };
  d.F = [](const Vec & x, const Vec &) -> Vec { return Eigen::Vector2d(x[1] * x[1] + 2.0, x[0]); };
  return d;
}

DecompositionFunction disturbed_double_integrator_backup_decomposition(double u_backup)
{
  DecompositionFunction d;
  d.name = "disturbed_double_integrator_backup";
  d.n    = 2;
  d.p    = 1;
  d.d    = [u_backup](const Vec & x, const Vec & w, const Vec &, const Vec &) -> Vec {
    return Eigen::Vector2d(x[1], u_backup + w[0]);
  };
  d.F = [u_backup](const Vec & x, const Vec & w) -> Vec { return Eigen::Vector2d(x[1], u_backup + w[0]); };
  return d;
}

DecompositionFunction scalar_decay_decomposition()
{
  DecompositionFunction d;
  d.name = "scalar_decay";
  d.n    = 1;
  d.p    = 0;
  d.d    = [](const Vec & x, const Vec &, const Vec &, const Vec &) -> Vec { return -x; };
  d.F    = [](const Vec & x, const Vec &) -> Vec { return -x; };
  return d;
}

}  // namespace rta
