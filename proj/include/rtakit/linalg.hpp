#pragma once

#include "rtakit/types.hpp"

namespace rta {

/// Matrix exponential (scaling and squaring with Pade approximants).
Mat expm(const Mat & A);

/// Zero-order-hold discretization of x' = A x + B u over dt: returns {Ad, Bd}.
std::pair<Mat, Mat> zoh_discretize(const Mat & A, const Mat & B, double dt);

}  // namespace rta
