#include "rtakit/sets.hpp"

#include "rtakit/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rta {

double LevelSet::margin(const Vec & x) const
{
  require_dim(x, n, ("margin of '" + name + "'").c_str());
  const double v = h(x);
  if (!std::isfinite(v)) { throw NumericError("margin of '" + name + "' is not finite"); }
  return v;
}

Vec LevelSet::gradient(const Vec & x) const
{
  require_dim(x, n, ("gradient of '" + name + "'").c_str());
  if (grad) { return grad(x); }
  const auto fn = [this](const Vec & s) {
    Vec out(1);
    out[0] = h(s);
    return out;
  };
  return finite_difference_jacobian(fn, x).row(0).transpose();
}

LevelSet make_level_set(std::string name, SetRole role, int n, std::function<double(const Vec &)> h,
  std::function<Vec(const Vec &)> grad, bool smooth)
{
  LevelSet s;
  s.name   = std::move(name);
  s.role   = role;
  s.n      = n;
  s.h      = std::move(h);
  s.grad   = std::move(grad);
  s.smooth = smooth;
  return s;
}

LevelSet quadratic_set(std::string name, SetRole role, QuadraticForm form)
{
  const int n = static_cast<int>(form.q.size());
  if (form.P.rows() != n || form.P.cols() != n) { throw UsageError("quadratic_set: P must be n x n"); }
  LevelSet s = make_level_set(
    std::move(name), role, n, [form](const Vec & x) { return form.eval(x); },
    [form](const Vec & x) { return form.grad(x); });
  s.quadratic = std::move(form);
  return s;
}

double IntersectionSet::margin(const Vec & x) const
{
  if (members.empty()) { throw UsageError("margin: empty intersection"); }
  double m = std::numeric_limits<double>::infinity();
  for (const auto & s : members) { m = std::min(m, s.margin(x)); }
  return m;
}

bool IntersectionSet::smooth() const
{
  return std::all_of(members.begin(), members.end(), [](const LevelSet & s) { return s.smooth; });
}

double margin(const LevelSet & set, const Vec & x) { return set.margin(x); }
double margin(const IntersectionSet & set, const Vec & x) { return set.margin(x); }

double double_integrator_viability_h(const Vec & x)
{
  require_dim(x, 2, "double_integrator_viability_h");
  return x[1] > 0.0 ? -2.0 * x[0] - x[1] * x[1] : -x[0];
}

double double_integrator_viability_h_smooth(const Vec & x)
{
  require_dim(x, 2, "double_integrator_viability_h_smooth");
  return -2.0 * x[0] - x[1] * x[1];
}

LevelSet double_integrator_constraint()
{
  QuadraticForm q{Mat::Zero(2, 2), Eigen::Vector2d(-1.0, 0.0), 0.0};
  return quadratic_set("di_constraint", SetRole::constraint, q);
}

LevelSet double_integrator_viability()
{
  return make_level_set(
    "di_viability", SetRole::safe, 2, double_integrator_viability_h,
    [](const Vec & x) -> Vec { return x[1] > 0.0 ? Eigen::Vector2d(-2.0, -2.0 * x[1]) : Eigen::Vector2d(-1.0, 0.0); },
    false);
}

LevelSet double_integrator_viability_smooth(double a)
{
  if (!(a > 0.0)) { throw UsageError("double_integrator_viability_smooth: scale must be positive"); }
  Mat P = Mat::Zero(2, 2);
  P(1, 1) = -1.0;
  return quadratic_set("di_viability_smooth", SetRole::safe, QuadraticForm{P, Eigen::Vector2d(-2.0 * a, 0.0), 0.0});
}

IntersectionSet double_integrator_backup()
{
  auto neg1 = quadratic_set("di_backup_x1", SetRole::backup, QuadraticForm{Mat::Zero(2, 2), Eigen::Vector2d(-1.0, 0.0), 0.0});
  auto neg2 = quadratic_set("di_backup_x2", SetRole::backup, QuadraticForm{Mat::Zero(2, 2), Eigen::Vector2d(0.0, -1.0), 0.0});
  return IntersectionSet(std::vector<LevelSet>{neg1, neg2});
}

double quadratic_level_h(const Vec & x, const Mat & P, double c)
{
  if (P.rows() != x.size() || P.cols() != x.size()) { throw UsageError("quadratic_level_h: dimension mismatch"); }
  return c - x.dot(P * x);
}

Mat mass_spring_damper_lyapunov()
{
  Mat P(2, 2);
  P << 1.2, 0.1, 0.1, 1.1;
  return P;
}

LevelSet mass_spring_damper_safe_set(double c)
{
  return quadratic_set("msd_lyapunov", SetRole::safe, QuadraticForm{-mass_spring_damper_lyapunov(), Vec::Zero(2), c});
}

IntersectionSet mass_spring_damper_constraint()
{
  std::vector<LevelSet> faces;
  const char * names[] = {"msd_x1_upper", "msd_x1_lower", "msd_x2_upper", "msd_x2_lower"};
  for (int i = 0; i < 4; ++i) {
    Vec q = Vec::Zero(2);
    q[i / 2] = (i % 2 == 0) ? -1.0 : 1.0;
    faces.push_back(quadratic_set(names[i], SetRole::constraint, QuadraticForm{Mat::Zero(2, 2), q, 1.0}));
  }
  return IntersectionSet(std::move(faces));
}

double unicycle_safe_h(const Vec & x)
{
  require_dim(x, 2, "unicycle_safe_h");
  return x[0] - std::sin(x[1]) - 1.0;
}

LevelSet unicycle_safe_set()
{
  return make_level_set("unicycle_safe", SetRole::safe, 2, unicycle_safe_h,
    [](const Vec & x) -> Vec { return Eigen::Vector2d(1.0, -std::cos(x[1])); });
}

LevelSet unicycle_constraint()
{
  return quadratic_set("unicycle_constraint", SetRole::constraint, QuadraticForm{Mat::Zero(2, 2), Eigen::Vector2d(1.0, 0.0), 0.0});
}

LevelSet cwh_constraint(double r_min)
{
  Mat P = Mat::Zero(5, 5);
  P(0, 0) = 1.0;
  P(1, 1) = 1.0;
  return quadratic_set("cwh_keep_out", SetRole::constraint, QuadraticForm{P, Vec::Zero(5), -r_min * r_min});
}

bool cwh_backup_membership(const Vec & x, CwhBackup which, double r_min, double mean_motion, double tol)
{
  require_dim(x, 5, "cwh_backup_membership");
  if (which == CwhBackup::invariant_points) {
    return std::abs(x[0]) <= tol && std::abs(x[2]) <= tol && std::abs(x[3]) <= tol && x[4] >= 0.0
           && std::abs(x[1]) >= r_min;
  }
  const double n = mean_motion;
  return std::abs(x[2] - 0.5 * n * x[1]) <= tol && std::abs(x[3] + 2.0 * n * x[0]) <= tol
         && x[0] * x[0] + 0.25 * x[1] * x[1] >= r_min * r_min;
}

LevelSet rigid_body_constraint(double omega_max)
{
  return quadratic_set("rigid_body_rate_limit", SetRole::constraint,
    QuadraticForm{-Mat::Identity(3, 3), Vec::Zero(3), omega_max * omega_max});
}

double rigid_body_backup_level(const Eigen::Vector3d & J, double omega_max) { return omega_max * omega_max * J.minCoeff(); }

LevelSet rigid_body_backup_set(const Eigen::Vector3d & J, double omega_max)
{
  const Mat Jm = -Mat(J.asDiagonal());
  return quadratic_set("rigid_body_energy", SetRole::backup,
    QuadraticForm{Jm, Vec::Zero(3), rigid_body_backup_level(J, omega_max)});
}

LevelSet two_cart_constraint()
{
  return quadratic_set("two_cart_separation", SetRole::constraint,
    QuadraticForm{Mat::Zero(4, 4), Eigen::Vector4d(-1.0, 0.0, 1.0, 0.0), 0.0});
}

void SafeBackwardImageSpec::validate() const
{
  if (!(horizon > 0.0)) { throw UsageError("SafeBackwardImageSpec: horizon must be positive"); }
  if (samples < 1) { throw UsageError("SafeBackwardImageSpec: sample count must be >= 1"); }
  if (constraint.empty() || backup_set.empty()) { throw UsageError("SafeBackwardImageSpec: sets must be nonempty"); }
  if (!backup.eval) { throw UsageError("SafeBackwardImageSpec: backup law missing"); }
}

SbiResult sbi_membership(const SafeBackwardImageSpec & spec, const ContinuousAffinePlant & plant, const Vec & x)
{
  spec.validate();
  SbiResult r;
  r.witness = flow(plant, spec.backup, x, spec.horizon, spec.horizon / spec.samples);
  if (r.witness.blew_up) {
    r.diagnostic = "backup flow blew up: " + r.witness.diagnostic;
    return r;
  }
  r.path_margin = std::numeric_limits<double>::infinity();
  for (const auto & s : r.witness.states) { r.path_margin = std::min(r.path_margin, spec.constraint.margin(s)); }
  r.terminal_margin = spec.backup_set.margin(r.witness.back());
  r.member          = r.path_margin >= spec.eps1 && r.terminal_margin >= spec.eps2;
  return r;
}

NagumoReport nagumo_boundary_check(const ContinuousAffinePlant & plant, const FeedbackLaw & law, const LevelSet & set,
  const Vec & interior, int n_samples, std::uint64_t seed, double tol)
{
  require_dim(interior, set.n, "nagumo_boundary_check: interior point");
  if (!(set.margin(interior) > 0.0)) { throw UsageError("nagumo_boundary_check: no interior point (h <= 0 at seed)"); }
  Rng rng(seed);
  NagumoReport rep;
  rep.min_hdot = std::numeric_limits<double>::infinity();
  const int max_rays = 20 * n_samples;
  for (int ray = 0; ray < max_rays && rep.sampled < n_samples; ++ray) {
    Vec d(set.n);
    for (int i = 0; i < set.n; ++i) { d[i] = rng.normal(); }
    d.normalize();
    // grow the bracket until the ray leaves the set
    double hi = 1.0;
    while (hi < 1e6 && set.margin(interior + hi * d) >= 0.0) { hi *= 2.0; }
    if (set.margin(interior + hi * d) >= 0.0) {
      ++rep.skipped_rays;
      continue;
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (set.margin(interior + mid * d) >= 0.0 ? lo : hi) = mid;
    }
    const Vec xb    = interior + lo * d;
    const double hd = set.gradient(xb).dot(eval_closed_loop(plant, law, xb));
    ++rep.sampled;
    rep.min_hdot = std::min(rep.min_hdot, hd);
    if (hd < -tol) { rep.violations.push_back({xb, hd}); }
  }
  return rep;
}

}  // namespace rta
