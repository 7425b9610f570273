#pragma once

#include "rtakit/integration.hpp"
#include "rtakit/sets.hpp"
#include "rtakit/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rta {

inline constexpr int kMaxCornerDim = 12;

/// d(x, w, x_hat, w_hat) for a mixed-monotone system x' = F(x, w).
struct DecompositionFunction
{
  std::string name;
  int n{0};
  int p{0};
  std::function<Vec(const Vec & x, const Vec & w, const Vec & xh, const Vec & wh)> d;
  /// The system it decomposes, used by the validator and Monte-Carlo checks.
  std::function<Vec(const Vec & x, const Vec & w)> F;
};

/// E(x, x_hat) = [d(x, w_lo, x_hat, w_hi); d(x_hat, w_hi, x, w_lo)] over stacked 2n states.
struct EmbeddingSystem
{
  int n{0};
  VectorField E;

  Vec operator()(const Vec & x, const Vec & xh) const;
};

/// All 2^n corners in binary-counter order: bit i of the counter selects upper[i].
std::vector<Vec> corners(const Hyperrectangle & rect);
std::vector<Vec> corners(const Box & box);

EmbeddingSystem build_embedding(const DecompositionFunction & d, const Box & w_box);

/// Terminal rectangle of the embedding flow. Throws NumericError naming the first inversion time.
Hyperrectangle reach_overapprox(
  const DecompositionFunction & d, const Box & w_box, const Hyperrectangle & rect0, double t, double dt);

/// -(1/p) log sum exp(-p s), evaluated around min(values).
double lse(const std::vector<double> & values, double p);

/// LSE of h over the corners of rect; for an intersection every member contributes its corner values.
double lse_h(const IntersectionSet & h, const Hyperrectangle & rect, double p);

struct PsiResult
{
  double value{0.0};
  double argmax_time{0.0};
  bool inverted{false};
  std::string diagnostic;
};

struct PsiOptions
{
  double horizon{1.0};
  double dt{0.05};
  double p{1e3};
  /// When set, gamma(tau) also folds in the constraint corners of every rectangle up to tau, so Psi >= 0
  /// certifies the path as well as the endpoint.
  const IntersectionSet * path_constraint{nullptr};
};

/// Psi(x) = max over the sample grid of gamma(tau; x). Inversion yields -inf with a diagnostic.
PsiResult psi(const IntersectionSet & h_b, const DecompositionFunction & d, const Box & w_box, const Vec & x,
  const PsiOptions & opt);

struct DecompositionReport
{
  int samples{0};
  double worst_diagonal{0.0};
  double worst_sign{0.0};
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

/// Samples argument tuples in `state_box` x `w_box` and checks the four decomposition conditions by central
/// differences.
DecompositionReport validate_decomposition(const DecompositionFunction & d, const Box & state_box, const Box & w_box,
  int samples, std::uint64_t seed, double tol = 1e-6);

struct ContainmentReport
{
  int samples{0};
  int contained{0};
  Hyperrectangle over;
  Hyperrectangle hull;

  bool passed() const { return samples == contained; }
};

/// Monte-Carlo check: piecewise-constant disturbance signals (switching every `hold` seconds) and random initial
/// states in rect0; endpoints at time t must lie inside reach_overapprox.
ContainmentReport monte_carlo_containment(const DecompositionFunction & d, const Box & w_box,
  const Hyperrectangle & rect0, double t, double dt, int samples, std::uint64_t seed, double hold = 0.1);

/// x1' = x2^2 + 2, x2' = x1 with the branch decomposition for the squared term.
DecompositionFunction mm_example_decomposition();

/// Disturbed double integrator under u_b = u_backup: x1' = x2, x2' = u_backup + w.
DecompositionFunction disturbed_double_integrator_backup_decomposition(double u_backup = -1.0);

/// d(x, x_hat) = -x for x' = -x (scalar test system; the diagonal entry may depend on x freely).
DecompositionFunction scalar_decay_decomposition();

}  // namespace rta
