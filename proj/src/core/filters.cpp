#include "rtakit/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rta {

double AlphaFunction::operator()(double s) const
{
  switch (kind) {
  case AlphaKind::linear: return gain * s;
  case AlphaKind::cubic: return gain * s * s * s;
  case AlphaKind::tanh: return gain * std::tanh(s);
  }
  return gain * s;
}

const char * to_string(FilterKind k)
{
  switch (k) {
  case FilterKind::none: return "none";
  case FilterKind::rbsf: return "rbsf";
  case FilterKind::sbsf: return "sbsf";
  case FilterKind::easif: return "easif";
  case FilterKind::iasif: return "iasif";
  case FilterKind::rasif: return "rasif";
  case FilterKind::mmasif: return "mmasif";
  }
  return "none";
}

const char * to_string(FilterMode m)
{
  switch (m) {
  case FilterMode::pass: return "pass";
  case FilterMode::backup: return "backup";
  case FilterMode::qp_modified: return "qp-modified";
  case FilterMode::qp_infeasible_fallback: return "qp-infeasible-fallback";
  }
  return "pass";
}

const std::vector<std::string> & filter_names()
{
  static const std::vector<std::string> names{"none", "rbsf", "sbsf", "easif", "iasif", "rasif", "mmasif"};
  return names;
}

FilterKind parse_filter_kind(const std::string & s)
{
  static const FilterKind kinds[] = {FilterKind::none, FilterKind::rbsf, FilterKind::sbsf, FilterKind::easif,
    FilterKind::iasif, FilterKind::rasif, FilterKind::mmasif};
  for (FilterKind k : kinds) {
    if (s == to_string(k)) { return k; }
  }
  std::string valid;
  for (const auto & n : filter_names()) { valid += (valid.empty() ? "" : ", ") + n; }
  throw UsageError("unknown filter '" + s + "' (valid: " + valid + ")");
}

LatchState latch_update(const LatchState & latch, const LatchRule & rule, bool intervened_now, double t,
  bool release_predicate_result)
{
  if (t < latch.last_t) { throw UsageError("latch_update: time went backwards"); }
  LatchState next = latch;
  next.last_t     = t;
  if (intervened_now) {
    if (!latch.latched) { next.since = t; }
    next.latched = true;
    return next;
  }
  if (!latch.latched) { return next; }
  switch (rule.rule) {
  case ReleaseRule::instant: next.latched = false; break;
  case ReleaseRule::min_hold: next.latched = t - latch.since < rule.hold - 1e-9; break;
  case ReleaseRule::condition: next.latched = !release_predicate_result; break;
  }
  return next;
}

void FilterConfig::validate() const
{
  const auto need = [this](bool ok, const char * what) {
    if (!ok) { throw UsageError(std::string("filter ") + to_string(kind) + ": " + what); }
  };
  need(plant.n > 0, "plant missing");
  need(barrier_buffer >= 0.0 && std::isfinite(barrier_buffer), "barrier_buffer must be finite and >= 0");
  switch (kind) {
  case FilterKind::none: return;
  case FilterKind::rbsf:
    need(discrete.has_value(), "discrete plant required");
    need(!safe_set.empty(), "safe set required");
    need(static_cast<bool>(backup.eval), "backup law required");
    return;
  case FilterKind::sbsf:
    need(discrete.has_value(), "discrete plant required");
    need(!constraint.empty() && !backup_set.empty(), "constraint and backup sets required");
    need(static_cast<bool>(backup.eval), "backup law required");
    need(sbsf_steps >= 1, "sbsf_steps must be >= 1");
    return;
  case FilterKind::easif: need(!safe_set.empty(), "safe set required"); return;
  case FilterKind::iasif:
    need(!constraint.empty(), "constraint set required");
    need(!terminal_constraint || !backup_set.empty(), "backup set required for the terminal constraint");
    need(static_cast<bool>(backup.eval) && backup.smooth, "smooth backup law required");
    need(horizon > 0.0 && dt_backup > 0.0, "horizon and dt_backup must be positive");
    return;
  case FilterKind::rasif:
    need(nondet.has_value(), "nondeterministic plant required");
    need(!safe_set.empty(), "safe set required");
    return;
  case FilterKind::mmasif:
    need(nondet.has_value(), "nondeterministic plant required");
    need(decomposition.has_value(), "decomposition function required");
    need(!backup_set.empty(), "backup set required");
    need(static_cast<bool>(backup.eval), "backup law required");
    return;
  }
}

namespace {

Vec backup_input(const FilterConfig & cfg, const Vec & x) { return cfg.plant.u_box.clamp(cfg.backup(x)); }

FilterOutput backup_output(const FilterConfig & cfg, const Vec & x, FilterMode mode, double margin, std::string diag = {})
{
  FilterOutput out;
  out.u_act      = backup_input(cfg, x);
  out.intervened = true;
  out.mode       = mode;
  out.margin     = margin;
  out.diagnostic = std::move(diag);
  return out;
}

void flip(std::vector<LinearConstraint> & cs)
{
  for (auto & c : cs) {
    c.a = -c.a;
    c.b = -c.b;
  }
}

/// Shared QP tail of every ASIF variant.
FilterOutput solve_barrier_qp(const FilterConfig & cfg, const Vec & x, const Vec & u_des,
  std::vector<LinearConstraint> constraints, double margin)
{
  if (cfg.fault_flip_barrier) { flip(constraints); }
  QPSpec spec{u_des, std::move(constraints), cfg.plant.u_box};
  QPSolution sol = solve(spec);
  FilterOutput out;
  out.margin = margin;
  if (!sol.optimal()) {
    out.mode       = FilterMode::qp_infeasible_fallback;
    out.intervened = true;
    out.u_act      = cfg.backup.eval ? backup_input(cfg, x) : cfg.plant.u_box.clamp(u_des);
    out.diagnostic = "barrier QP infeasible";
    out.solver     = std::move(sol);
    return out;
  }
  out.u_act      = cfg.plant.u_box.clamp(sol.u_act);
  const bool mod = (out.u_act - u_des).lpNorm<Eigen::Infinity>() > 1e-9;
  out.mode       = mod ? FilterMode::qp_modified : FilterMode::pass;
  out.intervened = mod;
  if (!mod) { out.u_act = u_des; }
  out.solver = std::move(sol);
  return out;
}

LinearConstraint lie_constraint(const Vec & row, const Vec & f, const Mat & g, double alpha_term)
{
  return LinearConstraint{(row.transpose() * g).transpose(), row.dot(f) + alpha_term};
}

}  // namespace

FilterOutput rbsf(const FilterConfig & cfg, const Vec & x, const Vec & u_des)
{
  const Vec u = cfg.plant.u_box.clamp(u_des);
  Vec cand;
  try {
    cand = cfg.discrete->step(x, u);
  } catch (const NumericError & e) {
    return backup_output(cfg, x, FilterMode::backup, -std::numeric_limits<double>::infinity(), e.what());
  }
  if (!cand.allFinite()) {
    return backup_output(cfg, x, FilterMode::backup, -std::numeric_limits<double>::infinity(), "non-finite candidate");
  }
  const double m = cfg.safe_set.margin(cand);
  if (m >= cfg.eps) {
    FilterOutput out;
    out.u_act  = u;
    out.mode   = FilterMode::pass;
    out.margin = m;
    return out;
  }
  return backup_output(cfg, x, FilterMode::backup, m);
}

FilterOutput sbsf(const FilterConfig & cfg, const Vec & x, const Vec & u_des)
{
  const Vec u = cfg.plant.u_box.clamp(u_des);
  Trajectory traj;
  double path = std::numeric_limits<double>::infinity();
  double term = -std::numeric_limits<double>::infinity();
  try {
    Vec s = cfg.discrete->step(x, u);
    for (int i = 0; i <= cfg.sbsf_steps; ++i) {
      if (!s.allFinite() || s.lpNorm<Eigen::Infinity>() > kOverflowGuard) { throw NumericError("backup simulation blew up"); }
      traj.times.push_back(cfg.dt_ctrl * (i + 1));
      traj.states.push_back(s);
      const Vec ub = backup_input(cfg, s);
      traj.controls.push_back(ub);
      if (i < cfg.sbsf_steps) {
        path = std::min(path, cfg.constraint.margin(s));
        s    = cfg.discrete->step(s, ub);
      } else {
        term = cfg.backup_set.margin(s);
      }
    }
  } catch (const NumericError & e) {
    auto out        = backup_output(cfg, x, FilterMode::backup, -std::numeric_limits<double>::infinity(), e.what());
    out.backup_traj = std::move(traj);
    return out;
  }
  const double m = std::min(path, term);
  FilterOutput out;
  if (path >= cfg.eps1 && term >= cfg.eps2) {
    out.u_act  = u;
    out.mode   = FilterMode::pass;
    out.margin = m;
  } else {
    out = backup_output(cfg, x, FilterMode::backup, m);
  }
  out.backup_traj = std::move(traj);
  return out;
}

std::vector<LinearConstraint> easif_constraints(const FilterConfig & cfg, const Vec & x)
{
  const Vec f = cfg.plant.f(x);
  const Mat g = cfg.plant.g(x);
  std::vector<LinearConstraint> cs;
  for (const auto & h : cfg.safe_set.members) {
    cs.push_back(lie_constraint(h.gradient(x), f, g, cfg.alpha(h.margin(x) - cfg.barrier_buffer)));
  }
  return cs;
}

FilterOutput easif(const FilterConfig & cfg, const Vec & x, const Vec & u_des)
{
  return solve_barrier_qp(cfg, x, u_des, easif_constraints(cfg, x), cfg.safe_set.margin(x));
}

std::vector<LinearConstraint> iasif_constraints(const FilterConfig & cfg, const Vec & x, SensitivityTrajectory * traj_out)
{
  SensitivityTrajectory st = flow_with_sensitivity(cfg.plant, cfg.backup, x, cfg.horizon, cfg.dt_backup);
  if (st.base.blew_up) { throw NumericError("sensitivity integration blew up: " + st.base.diagnostic); }
  const Vec f = cfg.plant.f(x);
  const Mat g = cfg.plant.g(x);
  std::vector<LinearConstraint> cs;
  for (std::size_t k = 0; k < st.base.size(); ++k) {
    const Vec & xk = st.base.states[k];
    for (const auto & phi : cfg.constraint.members) {
      const Vec row = st.Q[k].transpose() * phi.gradient(xk);
      cs.push_back(lie_constraint(row, f, g, cfg.alpha(phi.margin(xk))));
    }
  }
  if (cfg.terminal_constraint) {
    const Vec & xN = st.base.back();
    for (const auto & hb : cfg.backup_set.members) {
      const Vec row = st.Q.back().transpose() * hb.gradient(xN);
      cs.push_back(lie_constraint(row, f, g, cfg.alpha(hb.margin(xN))));
    }
  }
  if (traj_out != nullptr) { *traj_out = std::move(st); }
  return cs;
}

FilterOutput iasif(const FilterConfig & cfg, const Vec & x, const Vec & u_des)
{
  SensitivityTrajectory st;
  std::vector<LinearConstraint> cs;
  try {
    cs = iasif_constraints(cfg, x, &st);
  } catch (const NumericError & e) {
    return backup_output(cfg, x, FilterMode::qp_infeasible_fallback, -std::numeric_limits<double>::infinity(), e.what());
  }
  double m = std::numeric_limits<double>::infinity();
  for (const auto & s : st.base.states) { m = std::min(m, cfg.constraint.margin(s)); }
  if (cfg.terminal_constraint) { m = std::min(m, cfg.backup_set.margin(st.base.back())); }
  FilterOutput out = solve_barrier_qp(cfg, x, u_des, std::move(cs), m);
  out.backup_traj  = std::move(st.base);
  return out;
}

namespace {

std::vector<Vec> disturbance_vertices(const Box & w)
{
  std::vector<Vec> out;
  for (auto & c : corners(w)) {
    const bool dup = std::any_of(out.begin(), out.end(), [&c](const Vec & v) { return v == c; });
    if (!dup) { out.push_back(std::move(c)); }
  }
  return out;
}

}  // namespace

std::vector<LinearConstraint> rasif_constraints(const FilterConfig & cfg, const Vec & x)
{
  const auto & nd = *cfg.nondet;
  const Vec f     = cfg.plant.f(x);
  const Mat g     = cfg.plant.g(x);
  const Mat g2    = nd.g2(x);
  std::vector<LinearConstraint> cs;
  for (const auto & w : disturbance_vertices(nd.w_box)) {
    const Vec fw = f + g2 * w;
    for (const auto & h : cfg.safe_set.members) {
      cs.push_back(lie_constraint(h.gradient(x), fw, g, cfg.alpha(h.margin(x) - cfg.barrier_buffer)));
    }
  }
  return cs;
}

FilterOutput rasif(const FilterConfig & cfg, const Vec & x, const Vec & u_des)
{
  return solve_barrier_qp(cfg, x, u_des, rasif_constraints(cfg, x), cfg.safe_set.margin(x));
}

PsiGradient psi_with_gradient(const FilterConfig & cfg, const Vec & x, double rel_step)
{
  PsiOptions opt;
  opt.horizon         = cfg.horizon;
  opt.dt              = cfg.dt_backup;
  opt.p               = cfg.lse_p;
  opt.path_constraint = cfg.psi_path_constraint ? &cfg.constraint : nullptr;
  const auto & d      = *cfg.decomposition;
  const Box & w       = cfg.nondet->w_box;

  PsiGradient out;
  const PsiResult center = psi(cfg.backup_set, d, w, x, opt);
  out.value              = center.value;
  if (center.inverted) {
    out.diagnostic = center.diagnostic;
    return out;
  }
  out.gradient = Vec(x.size());
  Vec xp       = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    xp[i]          = x[i] + h;
    const auto fp  = psi(cfg.backup_set, d, w, xp, opt);
    xp[i]          = x[i] - h;
    const auto fm  = psi(cfg.backup_set, d, w, xp, opt);
    xp[i]          = x[i];
    if (fp.inverted || fm.inverted) {
      out.diagnostic = fp.inverted ? fp.diagnostic : fm.diagnostic;
      return out;
    }
    out.gradient[i] = (fp.value - fm.value) / (2.0 * h);
  }
  out.valid = out.gradient.allFinite() && std::isfinite(out.value);
  if (!out.valid) { out.diagnostic = "non-finite Psi gradient"; }
  return out;
}

FilterOutput mm_asif(const FilterConfig & cfg, const Vec & x, const Vec & u_des)
{
  const PsiGradient pg = psi_with_gradient(cfg, x);
  if (!pg.valid) { return backup_output(cfg, x, FilterMode::qp_infeasible_fallback, pg.value, pg.diagnostic); }
  const auto & nd = *cfg.nondet;
  const Vec f     = cfg.plant.f(x);
  const Mat g     = cfg.plant.g(x);
  const Mat g2    = nd.g2(x);
  std::vector<LinearConstraint> cs;
  for (const auto & w : disturbance_vertices(nd.w_box)) { cs.push_back(lie_constraint(pg.gradient, f + g2 * w, g, cfg.alpha(pg.value - cfg.barrier_buffer))); }
  return solve_barrier_qp(cfg, x, u_des, std::move(cs), pg.value);
}

FilterOutput apply_filter(const FilterConfig & cfg, const Vec & x, const Vec & u_des)
{
  require_dim(x, cfg.plant.n, "filter: state");
  require_dim(u_des, cfg.plant.m, "filter: desired input");
  switch (cfg.kind) {
  case FilterKind::none: {
    FilterOutput out;
    out.u_act  = cfg.plant.u_box.clamp(u_des);
    out.margin = cfg.constraint.empty() ? 0.0 : cfg.constraint.margin(x);
    return out;
  }
  case FilterKind::rbsf: return rbsf(cfg, x, u_des);
  case FilterKind::sbsf: return sbsf(cfg, x, u_des);
  case FilterKind::easif: return easif(cfg, x, u_des);
  case FilterKind::iasif: return iasif(cfg, x, u_des);
  case FilterKind::rasif: return rasif(cfg, x, u_des);
  case FilterKind::mmasif: return mm_asif(cfg, x, u_des);
  }
  throw UsageError("apply_filter: unknown kind");
}

Filter::Filter(FilterConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

FilterOutput Filter::step(double t, const Vec & x, const Vec & u_des)
{
  FilterOutput out   = apply_filter(cfg_, x, u_des);
  const bool release = cfg_.latch.predicate ? cfg_.latch.predicate(x) : false;
  latch_             = latch_update(latch_, cfg_.latch, out.intervened, t, release);
  if (latch_.latched && !out.intervened) {
    out.u_act      = backup_input(cfg_, x);
    out.intervened = true;
    out.mode       = FilterMode::backup;
    out.diagnostic = "latched";
  }
  return out;
}

}  // namespace rta
