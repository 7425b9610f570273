#include "rtakit/dynamics.hpp"

#include "rtakit/integration.hpp"
#include "rtakit/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace rta {

double ContinuousAffinePlant::param(const std::string & key) const
{
  const auto it = params.find(key);
  if (it == params.end()) { throw UsageError("plant '" + name + "' has no parameter '" + key + "'"); }
  return it->second;
}

FeedbackLaw constant_law(Vec u, std::string name)
{
  const auto m = u.size();
  FeedbackLaw law;
  law.name     = std::move(name);
  law.eval     = [u](const Vec &) { return u; };
  law.jacobian = [m](const Vec & x) { return Mat::Zero(m, x.size()); };
  law.affine   = AffineCoefficients{Mat(m, 0), u};
  return law;
}

FeedbackLaw affine_law(Mat K, Vec k0, std::string name)
{
  if (K.rows() != k0.size()) { throw UsageError("affine_law: K rows must match offset length"); }
  FeedbackLaw law;
  law.name     = std::move(name);
  law.eval     = [K, k0](const Vec & x) -> Vec { return K * x + k0; };
  law.jacobian = [K](const Vec &) -> Mat { return K; };
  law.affine   = AffineCoefficients{K, k0};
  return law;
}

Vec eval_dynamics(const ContinuousAffinePlant & plant, const Vec & x, const Vec & u)
{
  require_dim(x, plant.n, "eval_dynamics: state");
  require_dim(u, plant.m, "eval_dynamics: input");
  Vec dx = plant.f(x);
  if (plant.m > 0) { dx.noalias() += plant.g(x) * u; }
  if (plant.nonaffine) { dx += plant.nonaffine(x, u); }
  return dx;
}

Vec eval_nondet(const NondetAffinePlant & plant, const Vec & x, const Vec & u, const Vec & w)
{
  require_dim(w, plant.p, "eval_nondet: disturbance");
  if (!w.allFinite()) { throw UsageError("eval_nondet: non-finite disturbance"); }
  Vec dx = eval_dynamics(plant.nominal, x, u);
  if (plant.p > 0) { dx.noalias() += plant.g2(x) * w; }
  return dx;
}

Vec eval_closed_loop(const ContinuousAffinePlant & plant, const FeedbackLaw & law, const Vec & x)
{
  if (plant.m == 0) { return eval_dynamics(plant, x, Vec(0)); }
  return eval_dynamics(plant, x, law(x));
}

DiscretePlant discretize(const ContinuousAffinePlant & plant, double dt, Discretization method, int substeps)
{
  if (!(dt > 0.0)) { throw UsageError("discretize: dt must be positive"); }
  if (substeps < 1) { throw UsageError("discretize: substeps must be >= 1"); }
  DiscretePlant out;
  out.n          = plant.n;
  out.m          = plant.m;
  out.dt         = dt;
  out.provenance = method;

  if (method == Discretization::exact_zoh_linear) {
    if (!plant.linear) { throw UsageError("discretize: exact ZOH requested for nonlinear plant '" + plant.name + "'"); }
    auto [Ad, Bd] = zoh_discretize(plant.linear->A, plant.linear->B, dt);
    const int n = plant.n;
    const int m = plant.m;
    out.F = [Ad = std::move(Ad), Bd = std::move(Bd), n, m](const Vec & x, const Vec & u) -> Vec {
      require_dim(x, n, "discrete step: state");
      require_dim(u, m, "discrete step: input");
      return Ad * x + Bd * u;
    };
    return out;
  }

  const double h = dt / substeps;
  out.F = [plant, h, substeps](const Vec & x, const Vec & u) -> Vec {
    require_dim(u, plant.m, "discrete step: input");
    const VectorField field = [&](const Vec & s) { return eval_dynamics(plant, s, u); };
    Vec s = x;
    for (int k = 0; k < substeps; ++k) { s = rk4_step(field, s, h); }
    return s;
  };
  return out;
}

Vec saturate(const Vec & u, const Box & box, SaturationMode mode)
{
  require_dim(u, box.dim(), "saturate");
  if (mode == SaturationMode::hard) { return box.clamp(u); }
  Vec out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double c = 0.5 * (box.upper[i] + box.lower[i]);
    const double r = 0.5 * (box.upper[i] - box.lower[i]);
    if (r == 0.0) {
      out[i] = c;
      continue;
    }
    const double v = (u[i] - c) / r;
    const double s = mode == SaturationMode::tanh ? std::tanh(v) : v / std::sqrt(1.0 + v * v);
    out[i] = c + r * s;
  }
  return out;
}

Vec saturate_derivative(const Vec & u, const Box & box, SaturationMode mode)
{
  require_dim(u, box.dim(), "saturate_derivative");
  Vec out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double c = 0.5 * (box.upper[i] + box.lower[i]);
    const double r = 0.5 * (box.upper[i] - box.lower[i]);
    if (r == 0.0) {
      out[i] = 0.0;
      continue;
    }
    const double v = (u[i] - c) / r;
    switch (mode) {
    case SaturationMode::hard: out[i] = (u[i] > box.lower[i] && u[i] < box.upper[i]) ? 1.0 : 0.0; break;
    case SaturationMode::tanh: {
      const double t = std::tanh(v);
      out[i] = 1.0 - t * t;
      break;
    }
    case SaturationMode::rational: out[i] = std::pow(1.0 + v * v, -1.5); break;
    }
  }
  return out;
}

Mat finite_difference_jacobian(const std::function<Vec(const Vec &)> & fn, const Vec & x, double rel_step)
{
  const Vec f0 = fn(x);
  Mat J(f0.size(), x.size());
  Vec xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    xp[j]          = x[j] + h;
    const Vec fp   = fn(xp);
    xp[j]          = x[j] - h;
    const Vec fm   = fn(xp);
    xp[j]          = x[j];
    J.col(j)       = (fp - fm) / (2.0 * h);
  }
  if (!J.allFinite()) { throw NumericError("finite_difference_jacobian: non-finite dynamics near state"); }
  return J;
}

Mat closed_loop_jacobian(const ContinuousAffinePlant & plant, const FeedbackLaw & law, const Vec & x)
{
  require_dim(x, plant.n, "closed_loop_jacobian");
  const bool has_law_jac = plant.m == 0 || static_cast<bool>(law.jacobian);
  if (plant.f_jacobian && plant.g_constant && has_law_jac) {
    Mat J = plant.f_jacobian(x);
    if (plant.m > 0) { J.noalias() += plant.g(x) * law.jacobian(x); }
    if (!J.allFinite()) { throw NumericError("closed_loop_jacobian: non-finite Jacobian"); }
    return J;
  }
  return finite_difference_jacobian([&](const Vec & s) { return eval_closed_loop(plant, law, s); }, x);
}

Eigen::Matrix3d skew(const Eigen::Vector3d & a)
{
  Eigen::Matrix3d S;
  S << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return S;
}

namespace {

ParamMap merge_params(const std::string & name, ParamMap defaults, const ParamMap & overrides)
{
  for (const auto & [k, v] : overrides) {
    if (!defaults.contains(k)) { throw UsageError("plant '" + name + "': unknown parameter '" + k + "'"); }
    if (!std::isfinite(v)) { throw UsageError("plant '" + name + "': parameter '" + k + "' is not finite"); }
    defaults[k] = v;
  }
  return defaults;
}

void require_positive(const ParamMap & p, std::initializer_list<const char *> keys, const std::string & name)
{
  for (const char * k : keys) {
    if (!(p.at(k) > 0.0)) { throw UsageError("plant '" + name + "': parameter '" + std::string(k) + "' must be positive"); }
  }
}

ContinuousAffinePlant linear_plant(std::string name, Mat A, Mat B, Box u_box, ParamMap params)
{
  ContinuousAffinePlant p;
  p.name       = std::move(name);
  p.n          = static_cast<int>(A.rows());
  p.m          = static_cast<int>(B.cols());
  p.f          = [A](const Vec & x) -> Vec { return A * x; };
  p.g          = [B](const Vec &) -> Mat { return B; };
  p.f_jacobian = [A](const Vec &) -> Mat { return A; };
  p.g_constant = true;
  p.u_box      = std::move(u_box);
  p.linear     = LinearStructure{A, B};
  p.params     = std::move(params);
  return p;
}

ContinuousAffinePlant double_integrator(const std::string & name, const ParamMap & p)
{
  Mat A(2, 2);
  A << 0, 1, 0, 0;
  Mat B(2, 1);
  B << 0, 1;
  return linear_plant(name, A, B, Box::symmetric(1, p.at("u_max")), p);
}

ContinuousAffinePlant mass_spring_damper(const ParamMap & p)
{
  Mat A(2, 2);
  A << 0, 1, -p.at("stiffness"), -p.at("damping");
  Mat B(2, 1);
  B << 0, 1;
  return linear_plant("mass_spring_damper", A, B, Box::symmetric(1, p.at("u_max")), p);
}

ContinuousAffinePlant damped_linear(const ParamMap & p)
{
  Mat A(2, 2);
  A << 0, 1, 0, -p.at("damping");
  Mat B(2, 1);
  B << 0, 1;
  return linear_plant("damped_linear", A, B, Box::symmetric(1, p.at("u_max")), p);
}

ContinuousAffinePlant two_cart(const ParamMap & p)
{
  const double b1 = p.at("b1");
  const double b2 = p.at("b2");
  Mat A = Mat::Zero(4, 4);
  A(0, 1) = 1.0;
  A(1, 1) = -b1;
  A(2, 3) = 1.0;
  A(3, 3) = -b2;
  Mat B = Mat::Zero(4, 2);
  B(1, 0) = 1.0;
  B(3, 1) = 1.0;
  return linear_plant("two_cart", A, B, Box::symmetric(2, p.at("u_max")), p);
}

ContinuousAffinePlant unicycle(const ParamMap & p)
{
  const double speed = p.at("speed");
  ContinuousAffinePlant pl;
  pl.name       = "unicycle";
  pl.n          = 2;
  pl.m          = 1;
  pl.f          = [speed](const Vec & x) -> Vec { return Eigen::Vector2d(speed * std::cos(x[1]), 0.0); };
  pl.g          = [](const Vec &) -> Mat { return Eigen::Vector2d(0.0, 1.0); };
  pl.f_jacobian = [speed](const Vec & x) -> Mat {
    Mat J = Mat::Zero(2, 2);
    J(0, 1) = -speed * std::sin(x[1]);
    return J;
  };
  pl.g_constant = true;
  pl.u_box      = Box::symmetric(1, p.at("u_max"));
  pl.params     = p;
  return pl;
}

ContinuousAffinePlant cwh(const ParamMap & p)
{
  const double n     = p.at("mean_motion");
  const double scale = 1.0 / (p.at("mass") * p.at("length_scale"));
  ContinuousAffinePlant pl;
  pl.name = "cwh";
  pl.n    = 5;
  pl.m    = 2;
  pl.f    = [n](const Vec & x) -> Vec {
    Vec dx(5);
    dx << x[2], x[3], 3.0 * n * n * x[0] + 2.0 * n * x[3], -2.0 * n * x[2], 0.0;
    return dx;
  };
  pl.g = [scale](const Vec &) -> Mat {
    Mat G = Mat::Zero(5, 2);
    G(2, 0) = scale;
    G(3, 1) = scale;
    return G;
  };
  pl.f_jacobian = [n](const Vec &) -> Mat {
    Mat J = Mat::Zero(5, 5);
    J(0, 2) = 1.0;
    J(1, 3) = 1.0;
    J(2, 0) = 3.0 * n * n;
    J(2, 3) = 2.0 * n;
    J(3, 2) = -2.0 * n;
    return J;
  };
  pl.g_constant = true;
  pl.nonaffine  = [](const Vec &, const Vec & u) -> Vec {
    Vec r = Vec::Zero(5);
    r[4]  = -(std::abs(u[0]) + std::abs(u[1]));
    return r;
  };
  pl.u_box = Box::symmetric(2, p.at("u_max"));
  pl.params     = p;
  return pl;
}

ContinuousAffinePlant rigid_body(const ParamMap & p)
{
  const Eigen::Vector3d Jd(p.at("J1"), p.at("J2"), p.at("J3"));
  const Eigen::Matrix3d J    = Jd.asDiagonal();
  const Eigen::Matrix3d Jinv = Jd.cwiseInverse().asDiagonal();
  ContinuousAffinePlant pl;
  pl.name = "rigid_body";
  pl.n    = 3;
  pl.m    = 3;
  pl.f    = [J, Jinv](const Vec & x) -> Vec {
    const Eigen::Vector3d w = x;
    return -(Jinv * w.cross(J * w));
  };
  pl.g          = [Jinv](const Vec &) -> Mat { return Jinv; };
  pl.f_jacobian = [J, Jinv](const Vec & x) -> Mat {
    const Eigen::Vector3d w = x;
    return -(Jinv * (skew(w) * J - skew(J * w)));
  };
  pl.g_constant = true;
  pl.u_box      = Box::symmetric(3, p.at("u_max"));
  pl.params     = p;
  return pl;
}

ContinuousAffinePlant mm_example(const ParamMap & p)
{
  ContinuousAffinePlant pl;
  pl.name       = "mm_example";
  pl.n          = 2;
  pl.m          = 0;
  pl.f          = [](const Vec & x) -> Vec { return Eigen::Vector2d(x[1] * x[1] + 2.0, x[0]); };
  pl.g          = [](const Vec &) -> Mat { return Mat::Zero(2, 0); };
  pl.f_jacobian = [](const Vec & x) -> Mat {
    Mat J(2, 2);
    J << 0.0, 2.0 * x[1], 1.0, 0.0;
    return J;
  };
  pl.g_constant = true;
  pl.u_box      = Box(Vec(0), Vec(0));
  pl.params     = p;
  return pl;
}

}  // namespace

const std::vector<std::string> & plant_names()
{
  static const std::vector<std::string> names{"cwh", "damped_linear", "disturbed_double_integrator", "double_integrator",
    "mass_spring_damper", "mm_example", "rigid_body", "two_cart", "unicycle"};
  return names;
}

PlantModel make_plant(const std::string & name, const ParamMap & params)
{
  if (name == "double_integrator") {
    return double_integrator(name, merge_params(name, {{"u_max", 1.0}}, params));
  }
  if (name == "disturbed_double_integrator") {
    const auto p = merge_params(name, {{"u_max", 1.0}, {"w_max", 0.2}}, params);
    if (p.at("w_max") < 0.0) { throw UsageError("plant '" + name + "': w_max must be nonnegative"); }
    NondetAffinePlant nd;
    nd.nominal = double_integrator(name, p);
    nd.p       = 1;
    nd.g2      = [](const Vec &) -> Mat { return Eigen::Vector2d(0.0, 1.0); };
    nd.w_box   = Box::symmetric(1, p.at("w_max"));
    return nd;
  }
  if (name == "mass_spring_damper") {
    const auto p = merge_params(name, {{"stiffness", 1.0}, {"damping", 1.0}, {"u_max", 1.0}}, params);
    require_positive(p, {"stiffness", "u_max"}, name);
    return mass_spring_damper(p);
  }
  if (name == "damped_linear") {
    const auto p = merge_params(name, {{"damping", 1.0}, {"u_max", 1.0}}, params);
    require_positive(p, {"u_max"}, name);
    return damped_linear(p);
  }
  if (name == "unicycle") {
    const auto p = merge_params(name, {{"speed", 1.0}, {"u_max", 1.0}}, params);
    require_positive(p, {"speed", "u_max"}, name);
    return unicycle(p);
  }
  if (name == "cwh") {
    ParamMap defaults{{"mass", 50.0}, {"mean_motion", 0.001027}, {"u_max", 0.5}, {"r_min", 0.5}, {"kappa1", 0.5},
      {"kappa2", -1.0}, {"length_scale", 1000.0}};
    auto p = merge_params(name, defaults, params);
    if (p.at("kappa2") < 0.0) { p["kappa2"] = 2.0 * p.at("mean_motion"); }
    require_positive(p, {"mass", "mean_motion", "u_max", "r_min", "length_scale"}, name);
    return cwh(p);
  }
  if (name == "rigid_body") {
    const auto p = merge_params(
      name, {{"J1", 12.0}, {"J2", 12.0}, {"J3", 5.0}, {"u_max", 1.0}, {"omega_max", 1.0}, {"k_d", 1.0}}, params);
    require_positive(p, {"J1", "J2", "J3", "u_max", "omega_max"}, name);
    if (p.at("k_d") < 0.0) { throw UsageError("plant 'rigid_body': k_d must be nonnegative"); }
    return rigid_body(p);
  }
  if (name == "two_cart") {
    const auto p = merge_params(name, {{"b1", 0.1}, {"b2", 0.25}, {"u_max", 1.0}}, params);
    require_positive(p, {"u_max"}, name);
    return two_cart(p);
  }
  if (name == "mm_example") { return mm_example(merge_params(name, {}, params)); }

  std::string valid;
  for (const auto & n : plant_names()) { valid += (valid.empty() ? "" : ", ") + n; }
  throw UsageError("unknown plant '" + name + "' (valid: " + valid + ")");
}

ContinuousAffinePlant make_continuous_plant(const std::string & name, const ParamMap & params)
{
  auto model = make_plant(name, params);
  if (auto * c = std::get_if<ContinuousAffinePlant>(&model)) { return std::move(*c); }
  return std::get<NondetAffinePlant>(model).nominal;
}

NondetAffinePlant make_nondet_plant(const std::string & name, const ParamMap & params)
{
  auto model = make_plant(name, params);
  if (auto * nd = std::get_if<NondetAffinePlant>(&model)) { return std::move(*nd); }
  NondetAffinePlant out;
  out.nominal = std::get<ContinuousAffinePlant>(std::move(model));
  out.p       = 0;
  out.g2      = [n = out.nominal.n](const Vec &) -> Mat { return Mat::Zero(n, 0); };
  out.w_box   = Box(Vec(0), Vec(0));
  return out;
}

FeedbackLaw rigid_body_backup_law(const ContinuousAffinePlant & rigid_body)
{
  if (rigid_body.name != "rigid_body") { throw UsageError("rigid_body_backup_law: plant is '" + rigid_body.name + "'"); }
  const Eigen::Vector3d Jd(rigid_body.param("J1"), rigid_body.param("J2"), rigid_body.param("J3"));
  const Eigen::Matrix3d J = Jd.asDiagonal();
  const double kd         = rigid_body.param("k_d");
  FeedbackLaw law;
  law.name = "rigid_body_detumble";
  law.eval = [J, kd](const Vec & x) -> Vec {
    const Eigen::Vector3d w = x;
    const Eigen::Vector3d v = w.cross(J * w) - kd * (J * w);
    return v.array().tanh().matrix();
  };
  law.jacobian = [J, kd](const Vec & x) -> Mat {
    const Eigen::Vector3d w = x;
    const Eigen::Vector3d v = w.cross(J * w) - kd * (J * w);
    const Eigen::Vector3d d = (1.0 - v.array().tanh().square()).matrix();
    const Eigen::Matrix3d dv = skew(w) * J - skew(J * w) - kd * J;
    return d.asDiagonal() * dv;
  };
  return law;
}

}  // namespace rta
