#include "rtakit/harness.hpp"

#include "rtakit/linalg.hpp"
#include "rtakit/scenarios.hpp"
#include "rtakit/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rta {

PrimaryController constant_primary(Vec u)
{
  PrimaryController p;
  p.name     = "constant";
  p.constant = u;
  p.eval     = [u](double, const Vec &) { return u; };
  return p;
}

void ScenarioConfig::validate() const
{
  filter.validate();
  require_dim(x0, filter.plant.n, "scenario: x0");
  if (!x0.allFinite()) { throw UsageError("scenario: x0 must be finite"); }
  if (!primary.eval) { throw UsageError("scenario: primary controller missing"); }
  if (!(duration >= 0.0) || !(rate > 0.0)) { throw UsageError("scenario: duration must be >= 0 and rate > 0"); }
  if (rate * duration > kMaxStepCount) { throw UsageError("scenario: rate * duration exceeds the 1e7 step guard"); }
  if (substeps < 1) { throw UsageError("scenario: substeps must be >= 1"); }
  if (constraint.empty() && filter.constraint.empty()) { throw UsageError("scenario: no constraint set for metrics"); }
  if (disturbed && !filter.nondet) { throw UsageError("scenario: disturbed run needs a nondeterministic plant"); }
}

namespace {

const IntersectionSet & metric_constraint(const ScenarioConfig & cfg)
{
  return cfg.constraint.empty() ? cfg.filter.constraint : cfg.constraint;
}

}  // namespace

RunResult run_closed_loop(const ScenarioConfig & cfg)
{
  cfg.validate();
  Filter filter(cfg.filter);
  const auto & plant     = cfg.filter.plant;
  const auto & C         = metric_constraint(cfg);
  const bool has_safe    = !cfg.safe_set.empty();
  const long ticks       = std::lround(cfg.duration * cfg.rate);
  const double tick      = 1.0 / cfg.rate;
  const double h         = tick / cfg.substeps;
  Rng rng(cfg.seed);

  RunResult res;
  res.scenario = cfg.id;
  res.records.reserve(static_cast<std::size_t>(ticks));
  MetricsReport & m = res.summary;

  Vec x = cfg.x0;
  res.fine.times.push_back(0.0);
  res.fine.states.push_back(x);
  double prev_margin      = C.margin(x);
  m.min_constraint_margin = prev_margin;
  m.min_safe_margin       = has_safe ? cfg.safe_set.margin(x) : prev_margin;
  if (prev_margin < 0.0) { m.first_violation_time = 0.0; }

  Vec prev_u;
  for (long k = 0; k < ticks && !m.blew_up; ++k) {
    const double t = static_cast<double>(k) * tick;
    StepRecord rec;
    rec.t     = t;
    rec.x     = x;
    rec.u_des = cfg.primary(t, x);
    const FilterOutput out = filter.step(t, x, rec.u_des);
    rec.u_act      = out.u_act;
    rec.intervened = out.intervened;
    rec.margin     = out.margin;
    rec.mode       = out.mode;

    if (out.intervened) {
      ++m.activation_steps;
      if (m.first_intervention_time < 0.0) {
        m.first_intervention_time   = t;
        m.first_intervention_margin = C.margin(x);
      }
    }
    m.control_deviation += (rec.u_act - rec.u_des).norm() * tick;
    if (prev_u.size() > 0) { m.max_input_jump = std::max(m.max_input_jump, (rec.u_act - prev_u).lpNorm<Eigen::Infinity>()); }
    prev_u = rec.u_act;

    Vec w;
    if (cfg.disturbed) {
      const Box & W = cfg.filter.nondet->w_box;
      w             = Vec(W.dim());
      for (Eigen::Index i = 0; i < W.dim(); ++i) { w[i] = rng.uniform(W.lower[i], W.upper[i]); }
    }
    const Vec u = rec.u_act;
    const VectorField field = [&](const Vec & s) {
      return cfg.disturbed ? eval_nondet(*cfg.filter.nondet, s, u, w) : eval_dynamics(plant, s, u);
    };
    res.records.push_back(std::move(rec));

    for (int s = 1; s <= cfg.substeps; ++s) {
      Vec next;
      try {
        next = rk4_step(field, x, h);
      } catch (const NumericError & e) {
        m.blew_up = true;
        res.diagnostic = e.what();
        break;
      }
      if (next.lpNorm<Eigen::Infinity>() > kOverflowGuard) {
        m.blew_up      = true;
        res.diagnostic = "state exceeded overflow guard";
        break;
      }
      x                = std::move(next);
      const double ts  = t + static_cast<double>(s) * h;
      const double mc  = C.margin(x);
      if (mc < 0.0 && prev_margin >= 0.0 && m.first_violation_time < 0.0) {
        m.first_violation_time = ts - h * mc / (mc - prev_margin);
      }
      prev_margin             = mc;
      m.min_constraint_margin = std::min(m.min_constraint_margin, mc);
      m.min_safe_margin       = std::min(m.min_safe_margin, has_safe ? cfg.safe_set.margin(x) : mc);
      res.fine.times.push_back(ts);
      res.fine.states.push_back(x);
    }
  }
  res.fine.blew_up    = m.blew_up;
  res.fine.diagnostic = res.diagnostic;
  m.steps              = static_cast<int>(res.records.size());
  m.activation_seconds = m.activation_steps / cfg.rate;
  m.violated           = m.min_constraint_margin < -kTolSafety || m.blew_up;
  return res;
}

namespace {

bool quadratic_coeffs(const IntersectionSet & s, double out[6])
{
  if (s.members.size() != 1 || !s.members.front().quadratic || s.members.front().n != 2) { return false; }
  const auto & q = *s.members.front().quadratic;
  out[0]         = q.P(0, 0);
  out[1]         = q.P(0, 1) + q.P(1, 0);
  out[2]         = q.P(1, 1);
  out[3]         = q.q[0];
  out[4]         = q.q[1];
  out[5]         = q.c;
  return true;
}

/// Fills the planar kernel description when the scenario fits it.
bool planar_batch(const ScenarioConfig & cfg, double horizon, simd::PlanarRbsfBatch & b)
{
  const auto & f = cfg.filter;
  if (f.kind != FilterKind::rbsf || cfg.disturbed || !f.plant.linear || f.plant.n != 2 || f.plant.m != 1) { return false; }
  if (!f.discrete || f.discrete->provenance != Discretization::exact_zoh_linear) { return false; }
  if (!cfg.primary.constant || !f.backup.affine || f.latch.rule != ReleaseRule::instant) { return false; }
  if (!quadratic_coeffs(f.safe_set, b.safe) || !quadratic_coeffs(metric_constraint(cfg), b.constraint)) { return false; }
  const auto & aff = *f.backup.affine;
  if (aff.K.cols() != 0 && aff.K.cols() != 2) { return false; }

  const double tick = 1.0 / cfg.rate;
  const Mat & A     = f.plant.linear->A;
  const Mat & B     = f.plant.linear->B;
  auto [Ad, Bd]     = zoh_discretize(A, B, tick);
  const double h    = tick / cfg.substeps;
  const Mat I       = Mat::Identity(2, 2);
  const Mat hA      = h * A;
  const Mat hA2     = hA * hA;
  const Mat hA3     = hA2 * hA;
  const Mat M       = I + hA + hA2 / 2.0 + hA3 / 6.0 + hA3 * hA / 24.0;
  const Mat N       = h * (I + hA / 2.0 + hA2 / 6.0 + hA3 / 24.0) * B;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      b.Ad[2 * i + j] = Ad(i, j);
      b.M[2 * i + j]  = M(i, j);
    }
    b.Bd[i] = Bd(i, 0);
    b.N[i]  = N(i, 0);
    b.K[i]  = aff.K.cols() == 2 ? aff.K(0, i) : 0.0;
  }
  b.k0       = aff.k0[0];
  b.substeps = cfg.substeps;
  b.ticks    = static_cast<int>(std::lround(horizon * cfg.rate));
  b.u_lo     = f.plant.u_box.lower[0];
  b.u_hi     = f.plant.u_box.upper[0];
  b.u_des    = std::min(std::max((*cfg.primary.constant)[0], b.u_lo), b.u_hi);
  b.eps      = f.eps;
  return true;
}

}  // namespace

SafeVolumeResult safe_volume_estimate(
  const ScenarioConfig & cfg, const Box & box, int n_samples, double horizon, std::uint64_t seed, bool allow_batch)
{
  if (box.dim() != cfg.filter.plant.n) { throw UsageError("safe_volume_estimate: sampling box dimension"); }
  if (!box.lower.allFinite() || !box.upper.allFinite()) { throw UsageError("safe_volume_estimate: box must be finite"); }
  if (n_samples < 1) { throw UsageError("safe_volume_estimate: n_samples must be positive"); }
  Rng rng(seed);
  const auto n = box.dim();
  std::vector<Vec> starts;
  starts.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    Vec x(n);
    for (Eigen::Index d = 0; d < n; ++d) { x[d] = rng.uniform(box.lower[d], box.upper[d]); }
    starts.push_back(std::move(x));
  }

  SafeVolumeResult out;
  out.samples = n_samples;
  simd::PlanarRbsfBatch batch;
  if (allow_batch && planar_batch(cfg, horizon, batch)) {
    std::vector<double> a(starts.size());
    std::vector<double> b(starts.size());
    std::vector<double> mn(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
      a[i] = starts[i][0];
      b[i] = starts[i][1];
    }
    simd::planar_rbsf_min_margin(batch, a.data(), b.data(), starts.size(), mn.data());
    out.safe              = static_cast<int>(std::count_if(mn.begin(), mn.end(), [](double v) { return v >= -kTolSafety; }));
    out.used_batch_kernel = true;
  } else {
    ScenarioConfig run = cfg;
    run.duration       = horizon;
    for (const auto & x : starts) {
      run.x0 = x;
      if (!run_closed_loop(run).summary.violated) { ++out.safe; }
    }
  }
  out.fraction = static_cast<double>(out.safe) / n_samples;
  return out;
}

int activation_gap(const std::vector<int> & a, const std::vector<int> & b)
{
  if (a.empty() && b.empty()) { return 0; }
  if (a.empty() || b.empty()) { return std::numeric_limits<int>::max(); }
  const auto directed = [](const std::vector<int> & from, const std::vector<int> & to) {
    int worst = 0;
    for (int i : from) {
      int best = std::numeric_limits<int>::max();
      for (int j : to) { best = std::min(best, std::abs(i - j)); }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

ComparisonTable compare_filters(const std::string & scenario_id, const std::vector<FilterKind> & filters)
{
  ComparisonTable table;
  for (FilterKind k : filters) {
    ScenarioOverrides ov;
    ov.filter            = k;
    const auto cfg       = make_scenario(scenario_id, ov);
    const RunResult res  = run_closed_loop(cfg);
    ComparisonRow row;
    row.filter  = k;
    row.metrics = res.summary;
    for (std::size_t i = 0; i < res.records.size(); ++i) {
      if (res.records[i].intervened) { row.activation_indices.push_back(static_cast<int>(i)); }
      row.u_act0.push_back(res.records[i].u_act[0]);
    }
    table.all_safe = table.all_safe && !res.summary.violated;
    table.rows.push_back(std::move(row));
  }
  const auto find = [&table](FilterKind k) -> const ComparisonRow * {
    for (const auto & r : table.rows) {
      if (r.filter == k) { return &r; }
    }
    return nullptr;
  };
  const auto * rb = find(FilterKind::rbsf);
  const auto * sb = find(FilterKind::sbsf);
  const auto * ea = find(FilterKind::easif);
  if (rb && sb) { table.simplex_activation_gap = activation_gap(rb->activation_indices, sb->activation_indices); }
  if (rb && ea) {
    const double te = ea->metrics.first_intervention_time < 0.0 ? std::numeric_limits<double>::infinity()
                                                                : ea->metrics.first_intervention_time;
    const double tr = rb->metrics.first_intervention_time < 0.0 ? std::numeric_limits<double>::infinity()
                                                                : rb->metrics.first_intervention_time;
    table.easif_intervenes_first = te <= tr;
  }
  return table;
}

}  // namespace rta
