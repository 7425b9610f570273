#include "rtakit/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace rta {

Mat expm(const Mat & A)
{
  if (A.rows() != A.cols()) { throw UsageError("expm: matrix must be square"); }
  if (!A.allFinite()) { throw NumericError("expm: non-finite matrix"); }
  return A.exp();
}

std::pair<Mat, Mat> zoh_discretize(const Mat & A, const Mat & B, double dt)
{
  const auto n = A.rows();
  const auto m = B.cols();
  if (B.rows() != n) { throw UsageError("zoh_discretize: B row count differs from A"); }
  Mat aug = Mat::Zero(n + m, n + m);
  aug.topLeftCorner(n, n)  = A * dt;
  aug.topRightCorner(n, m) = B * dt;
  const Mat e = expm(aug);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

}  // namespace rta
