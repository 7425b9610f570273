#pragma once

#include "rtakit/dynamics.hpp"
#include "rtakit/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace rta {

/// States above this infinity norm are treated as a blow-up.
inline constexpr double kOverflowGuard = 1e12;

using VectorField = std::function<Vec(const Vec &)>;

/// Sampled trajectory; `controls[k]` is the input applied from times[k] (repeated at the end).
struct Trajectory
{
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> controls;
  bool blew_up{false};
  std::string diagnostic;

  std::size_t size() const { return times.size(); }
  const Vec & back() const { return states.back(); }
};

/// Trajectory with the sensitivity matrices Q_k = d phi(t_k; x0) / d x0.
struct SensitivityTrajectory
{
  Trajectory base;
  std::vector<Mat> Q;
};

/// One classical fourth-order Runge-Kutta step.
Vec rk4_step(const VectorField & derivative, const Vec & x, double dt);

/// Uniform sample grid {0, dt, ..., T}; the last interval is shortened when T is not a multiple of dt.
std::vector<double> sample_grid(double T, double dt);

/// Closed-loop flow of `plant` under `law` from x0 over [0, T].
Trajectory flow(const ContinuousAffinePlant & plant, const FeedbackLaw & law, const Vec & x0, double T, double dt);

/// Flow of an autonomous vector field; used for embedding systems and open-loop checks.
Trajectory flow_field(const VectorField & field, const Vec & x0, double T, double dt);

/// e^{A t} x0.
Vec lti_flow(const Mat & A, const Vec & x0, double t);

/// Joint RK4 integration of the state and dQ/dt = Df_cl(x) Q with Q(0) = I.
SensitivityTrajectory flow_with_sensitivity(
  const ContinuousAffinePlant & plant, const FeedbackLaw & law, const Vec & x0, double T, double dt);

/// Embedding-system trajectory over stacked (x, x_hat) states of length 2n.
struct EmbeddingTrajectory
{
  Trajectory stacked;
  /// inverted[k] is true when some lower coordinate exceeds its upper partner at sample k.
  std::vector<bool> inverted;
  /// Time of the first inverted sample, negative when order was preserved throughout.
  double first_inversion_time{-1.0};

  bool order_preserved() const { return first_inversion_time < 0.0; }
  Hyperrectangle rect(std::size_t k) const;
  Hyperrectangle terminal() const { return rect(stacked.size() - 1); }
};

/// Integrates the embedding field E from (rect.lower, rect.upper) over [0, T].
EmbeddingTrajectory flow_embedding(const VectorField & embedding, const Hyperrectangle & rect, double T, double dt);

}  // namespace rta
