#include "rtakit/validation.hpp"

#include "rtakit/qp_oracle.hpp"
#include "rtakit/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

namespace rta {

bool ValidationReport::passed() const
{
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult & c) { return c.passed; });
}

namespace {

std::string fmt(const char * f, double a, double b = 0.0)
{
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

/// Analytic gradients of every smooth set member against central differences near x0.
CheckResult check_gradients(const ScenarioConfig & s, Rng & rng)
{
  CheckResult r{s.id, "set_gradients", true, ""};
  double worst = 0.0;
  int checked  = 0;
  for (const IntersectionSet * set : {&s.filter.constraint, &s.filter.safe_set, &s.filter.backup_set, &s.safe_set}) {
    for (const auto & member : set->members) {
      if (!member.smooth || !member.grad) { continue; }
      for (int k = 0; k < 20; ++k) {
        Vec x = s.x0;
        for (Eigen::Index i = 0; i < x.size(); ++i) { x[i] += rng.uniform(-0.5, 0.5); }
        const Vec g  = member.gradient(x);
        const Mat fd = finite_difference_jacobian([&member](const Vec & y) { return Vec::Constant(1, member.margin(y)); }, x);
        const double err = (g - fd.row(0).transpose()).lpNorm<Eigen::Infinity>() / std::max(1.0, g.lpNorm<Eigen::Infinity>());
        worst            = std::max(worst, err);
        ++checked;
      }
    }
  }
  r.passed = worst <= 1e-5;
  r.detail = fmt("%.0f evaluations, worst relative error %.3g", checked, worst);
  return r;
}

/// Nagumo boundary condition of the safe set under the backup law.
CheckResult check_nagumo(const ScenarioConfig & s, std::uint64_t seed)
{
  CheckResult r{s.id, "nagumo_backup", true, ""};
  const auto & f = s.filter;
  int sampled    = 0;
  int bad        = 0;
  for (const auto & member : f.safe_set.members) {
    Vec interior = Vec::Zero(f.plant.n);
    if (s.id == "double_integrator" || s.id == "disturbed_double_integrator") { interior = Eigen::Vector2d(-1.0, -0.5); }
    if (s.id == "unicycle") { interior = Eigen::Vector2d(3.0, 0.0); }
    const auto rep = nagumo_boundary_check(f.plant, f.backup, member, interior, 200, seed, 1e-6);
    sampled += rep.sampled;
    bad += static_cast<int>(rep.violations.size());
  }
  r.passed = bad == 0 && sampled > 0;
  r.detail = fmt("%.0f boundary samples, %.0f violations", sampled, bad);
  return r;
}

CheckResult check_qp(const std::string & id, Rng & rng)
{
  CheckResult r{id, "qp_oracle", true, ""};
  int mismatches = 0;
  double worst   = 0.0;
  const int n    = 300;
  for (int k = 0; k < n; ++k) {
    const int m       = 1 + static_cast<int>(rng.next_u64() % 3);
    const QPSpec spec = random_qp_spec(rng, m);
    const auto sol    = solve(spec);
    const auto oracle = qp_enumeration_oracle(spec);
    if (sol.optimal() != oracle.feasible) {
      ++mismatches;
      continue;
    }
    if (!oracle.feasible) { continue; }
    const double obj = (sol.u_act - spec.u_des).squaredNorm();
    worst            = std::max({worst, std::abs(obj - oracle.objective), sol.kkt_residual});
  }
  r.passed = mismatches == 0 && worst <= 1e-6;
  r.detail = fmt("feasibility mismatches %.0f, worst objective/KKT gap %.3g", mismatches, worst);
  return r;
}

/// Sensitivity matrix from the variational equation against central differences of the backup flow.
CheckResult check_sensitivity(const ScenarioConfig & s)
{
  CheckResult r{s.id, "sensitivity", true, ""};
  const auto & f = s.filter;
  const double T = f.horizon;
  const double h = f.dt_backup;
  Vec x          = s.x0;
  for (Eigen::Index i = 0; i < x.size(); ++i) { x[i] += 0.05 * static_cast<double>(i + 1); }
  const auto st = flow_with_sensitivity(f.plant, f.backup, x, T, h);
  if (st.base.blew_up) {
    r.passed = false;
    r.detail = "backup flow blew up";
    return r;
  }
  const Mat fd = finite_difference_jacobian([&](const Vec & y) { return flow(f.plant, f.backup, y, T, h).back(); }, x);
  const double err = (st.Q.back() - fd).norm() / std::max(1.0, fd.norm());
  r.passed         = err <= 1e-3;
  r.detail         = fmt("relative error %.3g over horizon %.3g", err, T);
  return r;
}

CheckResult check_containment(const std::string & id, const DecompositionFunction & d, const Box & w_box,
  const Hyperrectangle & rect0, double t, std::uint64_t seed)
{
  CheckResult r{id, "containment", true, ""};
  const auto rep = monte_carlo_containment(d, w_box, rect0, t, 0.01, 1000, seed);
  r.passed       = rep.passed();
  r.detail       = fmt("%.0f of %.0f endpoints contained", rep.contained, rep.samples);
  return r;
}

CheckResult check_decomposition(const std::string & id, const DecompositionFunction & d, const Box & state_box,
  const Box & w_box, std::uint64_t seed)
{
  CheckResult r{id, "decomposition", true, ""};
  const auto rep = validate_decomposition(d, state_box, w_box, 2000, seed);
  r.passed       = rep.passed();
  r.detail       = fmt("%.0f samples, worst sign defect %.3g", rep.samples, rep.worst_sign);
  return r;
}

CheckResult check_safety(const std::string & id, FilterKind k, std::uint64_t seed, bool flip)
{
  ScenarioOverrides ov;
  ov.filter             = k;
  ov.seed               = seed;
  ov.fault_flip_barrier = flip;
  const auto cfg        = make_scenario(id, ov);
  const auto res        = run_closed_loop(cfg);
  CheckResult r{id, std::string("safety_") + to_string(k), !res.summary.violated, ""};
  r.detail = fmt("min constraint margin %.6g, activation steps %.0f", res.summary.min_constraint_margin,
    res.summary.activation_steps);
  return r;
}

/// Deep-interior state of each scenario where every barrier constraint is slack.
std::optional<Vec> deep_interior(const std::string & id)
{
  if (id == "double_integrator" || id == "disturbed_double_integrator") { return Vec(Eigen::Vector2d(-10.0, 0.0)); }
  if (id == "mass_spring_damper") { return Vec(Vec::Zero(2)); }
  if (id == "unicycle") { return Vec(Eigen::Vector2d(10.0, 0.0)); }
  if (id == "rigid_body") { return Vec(Vec::Zero(3)); }
  if (id == "two_cart") { return Vec(Eigen::Vector4d(0.0, 0.0, 10.0, 0.0)); }
  return std::nullopt;
}

/// ASIF output equals u_des when all constraints are slack.
CheckResult check_pass_through(const std::string & id, FilterKind k, const Vec & x, bool flip)
{
  ScenarioOverrides ov;
  ov.filter             = k;
  ov.fault_flip_barrier = flip;
  const auto cfg        = make_scenario(id, ov);
  const Box & U         = cfg.filter.plant.u_box;
  const Vec u_des       = U.lower + 0.6 * (U.upper - U.lower);
  const auto out        = apply_filter(cfg.filter, x, u_des);
  const double d        = (out.u_act - u_des).lpNorm<Eigen::Infinity>();
  CheckResult r{id, std::string("pass_through_") + to_string(k), d <= 1e-9, ""};
  r.detail = fmt("|u_act - u_des| %.3g at a deep-interior state", d);
  return r;
}

}  // namespace

ValidationReport validate_scenario(const std::string & id, std::uint64_t seed, bool flip_barrier)
{
  const auto & info = scenario_info(id);
  ValidationReport rep;
  Rng rng(seed);
  const auto base = make_scenario(id);
  rep.checks.push_back(check_gradients(base, rng));
  rep.checks.push_back(check_qp(id, rng));

  const auto & f = base.filter;
  const bool has_backup = static_cast<bool>(f.backup.eval) && f.plant.m > 0;
  if (has_backup && f.backup.smooth) { rep.checks.push_back(check_sensitivity(base)); }
  if (has_backup && !f.safe_set.empty() && f.safe_set.smooth() && id != "disturbed_double_integrator") {
    rep.checks.push_back(check_nagumo(base, seed));
  }
  if (id == "mm_reach_demo") {
    const auto d = mm_example_decomposition();
    const Box none(Vec(0), Vec(0));
    rep.checks.push_back(check_decomposition(id, d, Box::symmetric(2, 3.0), none, seed));
    rep.checks.push_back(check_containment(id, d, none, mm_reach_demo_initial_set(), 1.0, seed));
  }
  if (id == "disturbed_double_integrator") {
    const auto & d = *f.decomposition;
    const Box & W  = f.nondet->w_box;
    rep.checks.push_back(check_decomposition(id, d, Box::symmetric(2, 3.0), W, seed));
    const Hyperrectangle rect0(Eigen::Vector2d(-1.1, -0.1), Eigen::Vector2d(-0.9, 0.1));
    rep.checks.push_back(check_containment(id, d, W, rect0, f.horizon, seed));
  }

  const bool only_none = info.filters.size() == 1;
  for (FilterKind k : info.filters) {
    if (k == FilterKind::none && !only_none) { continue; }
    rep.checks.push_back(check_safety(id, k, seed, flip_barrier));
  }
  if (const auto x = deep_interior(id)) {
    for (FilterKind k : info.filters) {
      if (k == FilterKind::easif || k == FilterKind::iasif || k == FilterKind::rasif || k == FilterKind::mmasif) {
        rep.checks.push_back(check_pass_through(id, k, *x, flip_barrier));
      }
    }
  }
  return rep;
}

}  // namespace rta
