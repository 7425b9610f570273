#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace rta {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised for caller mistakes: wrong dimensions, unknown names, bad parameters.
class UsageError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation produces NaN/Inf where finite values are required.
class NumericError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vec & v) { return v.allFinite(); }

inline void require_dim(const Vec & v, Eigen::Index n, const char * what)
{
  if (v.size() != n) {
    throw UsageError(std::string(what) + ": expected length " + std::to_string(n) + ", got "
                     + std::to_string(v.size()));
  }
}

/// Axis-aligned box [lower, upper]; used for admissible inputs U and disturbances W.
struct Box
{
  Vec lower;
  Vec upper;

  Box() = default;
  Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi))
  {
    if (lower.size() != upper.size()) { throw UsageError("Box: lower/upper length mismatch"); }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      if (!(lower[i] <= upper[i])) { throw UsageError("Box: lower > upper at index " + std::to_string(i)); }
    }
  }

  static Box symmetric(Eigen::Index dim, double half_width)
  {
    return Box(Vec::Constant(dim, -half_width), Vec::Constant(dim, half_width));
  }

  Eigen::Index dim() const { return lower.size(); }

  bool contains(const Vec & v, double tol = 0.0) const
  {
    if (v.size() != dim()) { return false; }
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if (v[i] < lower[i] - tol || v[i] > upper[i] + tol) { return false; }
    }
    return true;
  }

  Vec clamp(const Vec & v) const { return v.cwiseMax(lower).cwiseMin(upper); }
};

/// Interval state box [lower, upper] used for reachable-set over-approximations.
struct Hyperrectangle
{
  Vec lower;
  Vec upper;

  Hyperrectangle() = default;
  Hyperrectangle(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi))
  {
    if (lower.size() != upper.size()) { throw UsageError("Hyperrectangle: lower/upper length mismatch"); }
    if (!is_ordered(lower, upper)) { throw UsageError("Hyperrectangle: lower > upper"); }
  }

  static Hyperrectangle point(const Vec & x) { return Hyperrectangle(x, x); }

  static bool is_ordered(const Vec & lo, const Vec & hi)
  {
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      if (!(lo[i] <= hi[i])) { return false; }
    }
    return true;
  }

  Eigen::Index dim() const { return lower.size(); }
  Vec width() const { return upper - lower; }

  bool contains(const Vec & x, double tol = 0.0) const
  {
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) { return false; }
    }
    return true;
  }
};

}  // namespace rta
