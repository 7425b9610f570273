#include "rtakit/integration.hpp"

#include "rtakit/linalg.hpp"

#include <cmath>

namespace rta {

Vec rk4_step(const VectorField & derivative, const Vec & x, double dt)
{
  if (!(dt > 0.0)) { throw UsageError("rk4_step: dt must be positive"); }
  const Vec k1 = derivative(x);
  if (!k1.allFinite()) { throw NumericError("rk4_step: non-finite derivative"); }
  const Vec k2 = derivative(x + 0.5 * dt * k1);
  const Vec k3 = derivative(x + 0.5 * dt * k2);
  const Vec k4 = derivative(x + dt * k3);
  Vec out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) { throw NumericError("rk4_step: non-finite derivative"); }
  return out;
}

std::vector<double> sample_grid(double T, double dt)
{
  if (!(T >= 0.0)) { throw UsageError("sample_grid: horizon must be nonnegative"); }
  if (!(dt > 0.0)) { throw UsageError("sample_grid: dt must be positive"); }
  std::vector<double> grid{0.0};
  // absorb representation error so that T = k*dt yields exactly k intervals
  const auto full = static_cast<long>(std::floor(T / dt + 1e-9));
  for (long k = 1; k <= full; ++k) { grid.push_back(std::min(T, static_cast<double>(k) * dt)); }
  if (T - grid.back() > 1e-9 * dt) { grid.push_back(T); }
  grid.back() = T;
  return grid;
}

namespace {

bool over_guard(const Vec & x) { return !x.allFinite() || x.lpNorm<Eigen::Infinity>() > kOverflowGuard; }

}  // namespace

Trajectory flow_field(const VectorField & field, const Vec & x0, double T, double dt)
{
  const auto grid = sample_grid(T, dt);
  Trajectory traj;
  traj.times.reserve(grid.size());
  traj.states.reserve(grid.size());
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double h = grid[k] - grid[k - 1];
    Vec next;
    try {
      next = rk4_step(field, traj.states.back(), h);
    } catch (const NumericError &) {
      traj.blew_up    = true;
      traj.diagnostic = "non-finite state at t=" + std::to_string(grid[k]);
      break;
    }
    if (over_guard(next)) {
      traj.blew_up    = true;
      traj.diagnostic = "state norm exceeded overflow guard at t=" + std::to_string(grid[k]);
      break;
    }
    traj.times.push_back(grid[k]);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Trajectory flow(const ContinuousAffinePlant & plant, const FeedbackLaw & law, const Vec & x0, double T, double dt)
{
  require_dim(x0, plant.n, "flow: initial state");
  Trajectory traj = flow_field([&](const Vec & x) { return eval_closed_loop(plant, law, x); }, x0, T, dt);
  traj.controls.reserve(traj.size());
  for (const auto & x : traj.states) { traj.controls.push_back(plant.m > 0 ? law(x) : Vec(0)); }
  return traj;
}

Vec lti_flow(const Mat & A, const Vec & x0, double t)
{
  if (A.rows() != x0.size()) { throw UsageError("lti_flow: dimension mismatch"); }
  if (t == 0.0) { return x0; }
  return expm(A * t) * x0;
}

SensitivityTrajectory flow_with_sensitivity(
  const ContinuousAffinePlant & plant, const FeedbackLaw & law, const Vec & x0, double T, double dt)
{
  require_dim(x0, plant.n, "flow_with_sensitivity: initial state");
  const int n = plant.n;
  // stacked state [x; vec(Q)] in column-major order
  const VectorField joint = [&](const Vec & z) -> Vec {
    const Vec x = z.head(n);
    Vec dz(n + n * n);
    dz.head(n) = eval_closed_loop(plant, law, x);
    const Mat J = closed_loop_jacobian(plant, law, x);
    const Eigen::Map<const Mat> Q(z.data() + n, n, n);
    Eigen::Map<Mat>(dz.data() + n, n, n) = J * Q;
    return dz;
  };
  Vec z0(n + n * n);
  z0.head(n) = x0;
  Eigen::Map<Mat>(z0.data() + n, n, n).setIdentity();

  const Trajectory stacked = flow_field(joint, z0, T, dt);
  SensitivityTrajectory out;
  out.base.times      = stacked.times;
  out.base.blew_up    = stacked.blew_up;
  out.base.diagnostic = stacked.diagnostic;
  out.base.states.reserve(stacked.size());
  out.Q.reserve(stacked.size());
  for (const auto & z : stacked.states) {
    out.base.states.push_back(z.head(n));
    out.base.controls.push_back(plant.m > 0 ? law(z.head(n)) : Vec(0));
    out.Q.push_back(Eigen::Map<const Mat>(z.data() + n, n, n));
  }
  return out;
}

Hyperrectangle EmbeddingTrajectory::rect(std::size_t k) const
{
  const Vec & s = stacked.states.at(k);
  const auto n  = s.size() / 2;
  return Hyperrectangle(s.head(n), s.tail(n));
}

EmbeddingTrajectory flow_embedding(const VectorField & embedding, const Hyperrectangle & rect, double T, double dt)
{
  const auto n = rect.dim();
  Vec a0(2 * n);
  a0 << rect.lower, rect.upper;
  EmbeddingTrajectory out;
  out.stacked = flow_field(embedding, a0, T, dt);
  out.inverted.reserve(out.stacked.size());
  for (std::size_t k = 0; k < out.stacked.size(); ++k) {
    const Vec & s   = out.stacked.states[k];
    const bool bad  = !Hyperrectangle::is_ordered(s.head(n), s.tail(n));
    out.inverted.push_back(bad);
    if (bad && out.first_inversion_time < 0.0) { out.first_inversion_time = out.stacked.times[k]; }
  }
  return out;
}

}  // namespace rta
