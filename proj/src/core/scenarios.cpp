#include "rtakit/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rta {

namespace {

using FK = FilterKind;

/// Buffer for explicit and robust barriers on plants whose barrier loses relative degree one at the boundary
/// (L_g h = 0 where the primary drives the state); holding u for 0.1 s overshoots by about 0.05 there.
constexpr double kSampledBuffer = 0.1;

std::vector<ScenarioInfo> build_catalog()
{
  std::vector<ScenarioInfo> c{
    {"cwh_invariance", "cwh", FK::none, {FK::none}, "free drift on a natural motion trajectory for one orbit"},
    {"disturbed_double_integrator", "disturbed_double_integrator", FK::rasif,
      {FK::none, FK::easif, FK::iasif, FK::rasif, FK::mmasif}, "double integrator with bounded acceleration disturbance"},
    {"double_integrator", "double_integrator", FK::rbsf, {FK::none, FK::rbsf, FK::sbsf, FK::easif, FK::iasif},
      "approach a wall at x1 = 0 under u_des = 1"},
    {"mass_spring_damper", "mass_spring_damper", FK::iasif, {FK::none, FK::rbsf, FK::sbsf, FK::easif, FK::iasif},
      "step input overshooting the unit box"},
    {"mm_reach_demo", "mm_example", FK::none, {FK::none}, "mixed-monotone reachability example"},
    {"rigid_body", "rigid_body", FK::iasif, {FK::none, FK::easif, FK::iasif}, "angular-rate limit under sinusoidal torques"},
    {"two_cart", "two_cart", FK::iasif, {FK::none, FK::iasif}, "two carts driven toward each other"},
    {"unicycle", "unicycle", FK::easif, {FK::none, FK::rbsf, FK::easif, FK::iasif}, "heading toward a wall at x1 = 0"},
  };
  std::sort(c.begin(), c.end(), [](const auto & a, const auto & b) { return a.id < b.id; });
  return c;
}

/// Picks the requested filter, rejecting kinds the scenario is not configured for.
FK pick_filter(const ScenarioInfo & info, const ScenarioOverrides & ov)
{
  const FK k = ov.filter.value_or(info.default_filter);
  if (std::find(info.filters.begin(), info.filters.end(), k) == info.filters.end()) {
    std::string valid;
    for (FK f : info.filters) { valid += std::string(valid.empty() ? "" : ", ") + to_string(f); }
    throw UsageError("scenario '" + info.id + "' does not support filter '" + to_string(k) + "' (valid: " + valid + ")");
  }
  return k;
}

LevelSet box_face(const std::string & name, int n, int i, double sign, double offset)
{
  Vec q = Vec::Zero(n);
  q[i]  = sign;
  return quadratic_set(name, SetRole::constraint, QuadraticForm{Mat::Zero(n, n), q, offset});
}

void double_integrator(ScenarioConfig & s, FK k, const ParamMap & params)
{
  const auto plant = make_continuous_plant("double_integrator", params);
  const double a   = plant.param("u_max");
  auto & f         = s.filter;
  f.kind           = k;
  f.barrier_buffer = kSampledBuffer;
  f.plant          = plant;
  f.constraint     = double_integrator_constraint();
  f.safe_set       = double_integrator_viability_smooth(a);
  f.backup_set     = double_integrator_backup();
  f.backup         = constant_law(Vec::Constant(1, -a), "full_brake");
  f.horizon        = 3.0;
  f.dt_backup      = 0.05;
  f.sbsf_steps     = 30;
  s.constraint     = f.constraint;
  s.safe_set       = a == 1.0 ? IntersectionSet(double_integrator_viability()) : IntersectionSet(f.safe_set);
  s.x0             = Eigen::Vector2d(-1.75, 0.0);
  s.primary        = constant_primary(Vec::Constant(1, a));
  s.duration       = 30.0;
}

void disturbed_double_integrator(ScenarioConfig & s, FK k, const ParamMap & params)
{
  const auto nd  = make_nondet_plant("disturbed_double_integrator", params);
  const double a = nd.nominal.param("u_max");
  const double w = nd.nominal.param("w_max");
  if (!(a > w)) { throw UsageError("disturbed_double_integrator: u_max must exceed w_max"); }
  auto & f         = s.filter;
  f.kind           = k;
  f.barrier_buffer = kSampledBuffer;
  f.plant          = nd.nominal;
  f.nondet         = nd;
  f.constraint     = double_integrator_constraint();
  f.safe_set       = double_integrator_viability_smooth(a - w);
  f.backup_set     = double_integrator_backup();
  f.backup         = constant_law(Vec::Constant(1, -a), "full_brake");
  f.decomposition  = disturbed_double_integrator_backup_decomposition(-a);
  f.horizon        = 3.0;
  f.dt_backup      = 0.05;
  s.constraint     = f.constraint;
  s.safe_set       = f.safe_set;
  s.x0             = Eigen::Vector2d(-1.75, 0.0);
  s.primary        = constant_primary(Vec::Constant(1, a));
  s.duration       = 20.0;
  s.disturbed      = true;
}

void mass_spring_damper(ScenarioConfig & s, FK k, const ParamMap & params)
{
  auto & f     = s.filter;
  f.kind       = k;
  f.plant      = make_continuous_plant("mass_spring_damper", params);
  f.constraint = mass_spring_damper_constraint();
  f.safe_set   = mass_spring_damper_safe_set();
  f.backup_set = f.safe_set;
  f.backup     = constant_law(Vec::Zero(1), "zero");
  f.horizon    = 3.0;
  f.dt_backup  = 0.05;
  f.sbsf_steps = 30;
  s.constraint = f.constraint;
  s.safe_set   = f.safe_set;
  s.x0         = Eigen::Vector2d(0.5, 0.0);
  s.primary    = constant_primary(Vec::Constant(1, f.plant.u_box.upper[0]));
  s.duration   = 20.0;
}

void unicycle(ScenarioConfig & s, FK k, const ParamMap & params)
{
  auto & f        = s.filter;
  f.kind          = k;
  f.barrier_buffer = kSampledBuffer;
  f.plant         = make_continuous_plant("unicycle", params);
  const double om = f.plant.param("u_max");
  const double r  = f.plant.param("speed") / om;
  f.constraint    = unicycle_constraint();
  // Turning at the full rate traces a circle of radius speed / u_max.
  f.safe_set = make_level_set(
    "unicycle_safe", SetRole::safe, 2, [r](const Vec & x) { return x[0] - r * std::sin(x[1]) - r; },
    [r](const Vec & x) -> Vec { return Eigen::Vector2d(1.0, -r * std::cos(x[1])); });
  f.backup              = constant_law(Vec::Constant(1, om), "full_turn");
  f.horizon             = 6.5 / om;
  f.dt_backup           = 0.05;
  f.terminal_constraint = false;
  s.constraint          = f.constraint;
  s.safe_set            = f.safe_set;
  s.x0                  = Eigen::Vector2d(3.0, 0.0);
  PrimaryController p;
  p.name     = "heading_tracker";
  p.eval     = [om](double, const Vec & x) { return Vec::Constant(1, std::clamp(2.0 * (std::numbers::pi - x[1]), -om, om)); };
  s.primary  = p;
  s.duration = 20.0;
}

void two_cart(ScenarioConfig & s, FK k, const ParamMap & params)
{
  auto & f              = s.filter;
  f.kind                = k;
  f.plant               = make_continuous_plant("two_cart", params);
  const double um       = f.plant.param("u_max");
  f.constraint          = two_cart_constraint();
  f.backup              = constant_law(Eigen::Vector2d(-um, um), "separate");
  f.alpha               = AlphaFunction{AlphaKind::linear, 2.0};
  f.horizon             = 10.0;
  f.dt_backup           = 0.1;
  f.terminal_constraint = false;
  s.constraint          = f.constraint;
  s.x0                  = Eigen::Vector4d(0.0, 0.0, 10.0, 0.0);
  PrimaryController p;
  p.name     = "converging_ramps";
  p.eval     = [](double t, const Vec &) -> Vec { return Eigen::Vector2d(1.0 - std::exp(-0.1 * t), std::exp(-0.25 * t) - 1.0); };
  s.primary  = p;
  s.duration = 30.0;
}

void rigid_body(ScenarioConfig & s, FK k, const ParamMap & params)
{
  auto & f        = s.filter;
  f.kind          = k;
  f.plant         = make_continuous_plant("rigid_body", params);
  const double om = f.plant.param("omega_max");
  const Eigen::Vector3d J(f.plant.param("J1"), f.plant.param("J2"), f.plant.param("J3"));
  f.backup_set = rigid_body_backup_set(J, om);
  // the energy ellipsoid is enforced along the path too, so the state itself stays in it
  LevelSet energy = f.backup_set.members.front();
  energy.role     = SetRole::constraint;
  f.constraint    = IntersectionSet(std::vector<LevelSet>{rigid_body_constraint(om), energy});
  f.safe_set   = f.backup_set;
  f.backup     = rigid_body_backup_law(f.plant);
  f.horizon    = 3.0;
  f.dt_backup  = 0.05;
  s.constraint = f.constraint;
  s.safe_set   = f.backup_set;
  s.x0         = Vec::Zero(3);
  s.primary    = sinusoid_primary(
    Vec::Ones(3), Eigen::Vector3d(0.5, 0.5, 0.25), Eigen::Vector3d(0.0, -std::numbers::pi / 4.0, std::numbers::pi / 4.0));
  s.duration = 20.0;
}

void cwh_invariance(ScenarioConfig & s, FK k, const ParamMap & params)
{
  auto & f        = s.filter;
  f.kind          = k;
  f.plant         = make_continuous_plant("cwh", params);
  const double n  = f.plant.param("mean_motion");
  const double r  = f.plant.param("r_min");
  f.constraint    = cwh_constraint(r);
  s.constraint    = f.constraint;
  const double x1 = 1.2 * r;
  Vec x0(5);
  x0 << x1, 0.0, 0.0, -2.0 * n * x1, 1.0;
  s.x0       = x0;
  s.primary  = constant_primary(Vec::Zero(2));
  s.duration = 2.0 * std::numbers::pi / n;
  s.rate     = 1.0;
}

void mm_reach_demo(ScenarioConfig & s, FK k, const ParamMap & params)
{
  auto & f                 = s.filter;
  f.kind                   = k;
  f.plant                  = make_continuous_plant("mm_example", params);
  const auto d             = mm_example_decomposition();
  const EmbeddingSystem E  = build_embedding(d, Box(Vec(0), Vec(0)));
  const auto traj          = flow_embedding(E.E, mm_reach_demo_initial_set(), 1.0, 0.01);
  Vec lo                   = traj.rect(0).lower;
  Vec hi                   = traj.rect(0).upper;
  for (std::size_t i = 1; i < traj.stacked.size(); ++i) {
    const auto r = traj.rect(i);
    lo           = lo.cwiseMin(r.lower);
    hi           = hi.cwiseMax(r.upper);
  }
  // The trajectory must stay in the hull of the over-approximating rectangles.
  f.constraint = IntersectionSet({box_face("reach_x1_lower", 2, 0, 1.0, -lo[0]), box_face("reach_x1_upper", 2, 0, -1.0, hi[0]),
    box_face("reach_x2_lower", 2, 1, 1.0, -lo[1]), box_face("reach_x2_upper", 2, 1, -1.0, hi[1])});
  s.constraint = f.constraint;
  s.x0         = Eigen::Vector2d(0.25, -0.25);
  s.primary    = constant_primary(Vec(0));
  s.duration   = 1.0;
}

}  // namespace

const std::vector<ScenarioInfo> & scenario_catalog()
{
  static const std::vector<ScenarioInfo> catalog = build_catalog();
  return catalog;
}

const ScenarioInfo & scenario_info(const std::string & id)
{
  for (const auto & s : scenario_catalog()) {
    if (s.id == id) { return s; }
  }
  std::string valid;
  for (const auto & s : scenario_catalog()) { valid += (valid.empty() ? "" : ", ") + s.id; }
  throw UsageError("unknown scenario '" + id + "' (valid: " + valid + ")");
}

Hyperrectangle mm_reach_demo_initial_set() { return Hyperrectangle(Vec::Constant(2, -0.5), Vec::Constant(2, 0.5)); }

PrimaryController sinusoid_primary(Vec amplitude, Vec frequency, Vec phase)
{
  if (amplitude.size() != frequency.size() || amplitude.size() != phase.size()) {
    throw UsageError("sinusoid primary: amplitude, frequency and phase lengths differ");
  }
  PrimaryController p;
  p.name = "sinusoid";
  p.eval = [amplitude, frequency, phase](double t, const Vec &) -> Vec {
    Vec u(amplitude.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) { u[i] = amplitude[i] * std::sin(frequency[i] * t + phase[i]); }
    return u;
  };
  return p;
}

PrimaryController linear_primary(Mat K, Vec k0)
{
  if (K.rows() != k0.size()) { throw UsageError("linear primary: K rows must match k0 length"); }
  PrimaryController p;
  p.name = "linear";
  p.eval = [K, k0](double, const Vec & x) -> Vec {
    if (x.size() != K.cols()) { throw UsageError("linear primary: K columns must match the state dimension"); }
    return K * x + k0;
  };
  return p;
}

ScenarioConfig make_scenario(const std::string & id, const ScenarioOverrides & ov)
{
  const auto & info = scenario_info(id);
  const FK k        = pick_filter(info, ov);
  ScenarioConfig s;
  s.id = id;
  if (id == "double_integrator") { double_integrator(s, k, ov.params); }
  else if (id == "disturbed_double_integrator") { disturbed_double_integrator(s, k, ov.params); }
  else if (id == "mass_spring_damper") { mass_spring_damper(s, k, ov.params); }
  else if (id == "unicycle") { unicycle(s, k, ov.params); }
  else if (id == "two_cart") { two_cart(s, k, ov.params); }
  else if (id == "rigid_body") { rigid_body(s, k, ov.params); }
  else if (id == "cwh_invariance") { cwh_invariance(s, k, ov.params); }
  else { mm_reach_demo(s, k, ov.params); }

  if (ov.duration) { s.duration = *ov.duration; }
  if (ov.rate) { s.rate = *ov.rate; }
  if (ov.seed) { s.seed = *ov.seed; }
  if (ov.x0) { s.x0 = *ov.x0; }
  if (ov.primary) { s.primary = *ov.primary; }
  auto & f = s.filter;
  if (ov.alpha) { f.alpha = *ov.alpha; }
  if (ov.horizon) { f.horizon = *ov.horizon; }
  if (ov.dt_backup) { f.dt_backup = *ov.dt_backup; }
  if (ov.eps1) { f.eps1 = *ov.eps1; }
  if (ov.eps2) { f.eps2 = *ov.eps2; }
  if (ov.barrier_buffer) { f.barrier_buffer = *ov.barrier_buffer; }
  if (ov.latch) { f.latch = *ov.latch; }
  f.fault_flip_barrier = ov.fault_flip_barrier;
  if (!(s.rate > 0.0)) { throw UsageError("scenario: rate must be positive"); }
  f.dt_ctrl = 1.0 / s.rate;
  if (k == FK::rbsf || k == FK::sbsf) {
    f.discrete = f.plant.linear ? discretize(f.plant, f.dt_ctrl, Discretization::exact_zoh_linear)
                                : discretize(f.plant, f.dt_ctrl, Discretization::rk4, s.substeps);
  }
  s.validate();
  return s;
}

}  // namespace rta
