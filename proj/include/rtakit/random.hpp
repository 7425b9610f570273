#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rta {

/// Seeded generator with platform-independent uniform and normal draws. std distributions are avoided
/// because their output is implementation-defined.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by Box-Muller (one draw per call, the partner is discarded).
  double normal()
  {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::mt19937_64 & engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

}  // namespace rta
