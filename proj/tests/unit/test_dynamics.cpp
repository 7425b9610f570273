#include "oracles.hpp"
#include "rtakit/dynamics.hpp"
#include "rtakit/integration.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rta;
using rta::testing::random_vec;

namespace {

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }

Vec random_in_box(Rng & rng, const Box & b)
{
  Vec u(b.dim());
  for (Eigen::Index i = 0; i < b.dim(); ++i) { u[i] = rng.uniform(b.lower[i], b.upper[i]); }
  return u;
}

}  // namespace

TEST(Dynamics, DoubleIntegratorField)
{
  const auto p = make_continuous_plant("double_integrator");
  EXPECT_TRUE(eval_dynamics(p, v2(-2, 3), Vec::Constant(1, 0.5)).isApprox(v2(3, 0.5)));
}

TEST(Dynamics, RigidBodyAtRest)
{
  const auto p = make_continuous_plant("rigid_body");
  const Vec dx = eval_dynamics(p, Vec::Zero(3), Eigen::Vector3d(0.2, 0.0, 0.0));
  EXPECT_NEAR(dx[0], 0.2 / 12.0, 1e-15);
  EXPECT_EQ(dx[1], 0.0);
  EXPECT_EQ(dx[2], 0.0);
}

TEST(Dynamics, TwoCartDrift)
{
  const auto p = make_continuous_plant("two_cart", {{"b1", 0.1}});
  const Vec dx = eval_dynamics(p, Eigen::Vector4d(0, 1, 0, 0), Vec::Zero(2));
  EXPECT_TRUE(dx.isApprox(Eigen::Vector4d(1, -0.1, 0, 0)));
}

TEST(Dynamics, NondetChannel)
{
  const auto p = make_nondet_plant("disturbed_double_integrator");
  EXPECT_TRUE(eval_nondet(p, v2(0, 0), Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)).isZero());
  EXPECT_TRUE(eval_nondet(p, v2(0, 0), Vec::Constant(1, 1.0), Vec::Constant(1, 0.3)).isApprox(v2(0, 1.3)));
  const Vec x = v2(0.4, -0.7);
  const Vec u = Vec::Constant(1, 0.2);
  EXPECT_TRUE(eval_nondet(p, x, u, Vec::Zero(1)).isApprox(eval_dynamics(p.nominal, x, u)));
}

TEST(Dynamics, DimensionMismatchIsUsageError)
{
  const auto p = make_continuous_plant("double_integrator");
  EXPECT_THROW(eval_dynamics(p, Vec::Zero(3), Vec::Zero(1)), UsageError);
  EXPECT_THROW(eval_dynamics(p, Vec::Zero(2), Vec::Zero(2)), UsageError);
}

TEST(Dynamics, CatalogShapes)
{
  const auto di = make_continuous_plant("double_integrator");
  EXPECT_EQ(di.n, 2);
  EXPECT_EQ(di.m, 1);
  EXPECT_EQ(di.u_box.lower[0], -1.0);
  EXPECT_EQ(di.u_box.upper[0], 1.0);
  const auto cwh = make_continuous_plant("cwh");
  EXPECT_EQ(cwh.n, 5);
  EXPECT_EQ(cwh.m, 2);
  EXPECT_TRUE(cwh.u_box.upper.isApprox(Vec::Constant(2, 0.5)));
  const auto rb = make_continuous_plant("rigid_body");
  EXPECT_EQ(rb.n, 3);
  EXPECT_EQ(rb.m, 3);
  EXPECT_TRUE(rb.u_box.upper.isApprox(Vec::Ones(3)));
  EXPECT_THROW(make_plant("no_such_plant"), UsageError);
  EXPECT_THROW(make_continuous_plant("double_integrator", {{"u_max", -1.0}}), UsageError);
  EXPECT_THROW(make_continuous_plant("double_integrator", {{"bogus", 1.0}}), UsageError);
}

TEST(Dynamics, ExactZohDoubleIntegrator)
{
  const auto p  = make_continuous_plant("double_integrator");
  const auto dz = discretize(p, 0.1, Discretization::exact_zoh_linear);
  const Vec x   = v2(-3, 0);
  const Vec y   = dz.step(x, Vec::Constant(1, 1.0));
  EXPECT_NEAR(y[0], -2.995, 1e-15);
  EXPECT_NEAR(y[1], 0.1, 1e-15);
  EXPECT_TRUE(y.isApprox(rta::testing::di_zoh(x, 1.0, 0.1), 1e-14));
  const auto fine = discretize(p, 0.1, Discretization::rk4, 100);
  EXPECT_LT((fine.step(x, Vec::Constant(1, 1.0)) - y).norm(), 1e-12);
}

TEST(Dynamics, ExactZohRejectsNonlinear)
{
  EXPECT_THROW(discretize(make_continuous_plant("unicycle"), 0.1, Discretization::exact_zoh_linear), UsageError);
}

TEST(Dynamics, SaturationExamples)
{
  const Box b = Box::symmetric(1, 1.0);
  EXPECT_EQ(saturate(Vec::Constant(1, 2.0), b, SaturationMode::hard)[0], 1.0);
  EXPECT_EQ(saturate(Vec::Constant(1, 0.0), b, SaturationMode::tanh)[0], 0.0);
  EXPECT_NEAR(saturate(Vec::Constant(1, 1.0), b, SaturationMode::rational)[0], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Dynamics, SaturationProperties)
{
  const Box b(Vec::Constant(1, -0.5), Vec::Constant(1, 2.0));
  for (auto mode : {SaturationMode::hard, SaturationMode::tanh, SaturationMode::rational}) {
    double prev = -std::numeric_limits<double>::infinity();
    for (double u = -20.0; u <= 20.0; u += 0.01) {
      const double s = saturate(Vec::Constant(1, u), b, mode)[0];
      EXPECT_GE(s, prev);
      prev = s;
      if (mode == SaturationMode::hard) {
        EXPECT_TRUE(b.contains(Vec::Constant(1, s)));
      } else {
        EXPECT_GT(s, -0.5);
        EXPECT_LT(s, 2.0);
      }
    }
  }
}

TEST(Dynamics, CatalogFiniteAndHalfStepConsistent)
{
  Rng rng(3);
  for (const auto & name : plant_names()) {
    const auto model = make_plant(name);
    const ContinuousAffinePlant & p =
      std::holds_alternative<ContinuousAffinePlant>(model) ? std::get<ContinuousAffinePlant>(model)
                                                           : std::get<NondetAffinePlant>(model).nominal;
    const double dt  = name == "cwh" ? 1.0 : 0.01;
    const auto full  = discretize(p, dt, Discretization::rk4);
    const auto half  = discretize(p, dt / 2.0, Discretization::rk4);
    for (int k = 0; k < 1000; ++k) {
      const Vec x = random_vec(rng, p.n, -1.0, 1.0);
      const Vec u = random_in_box(rng, p.u_box);
      ASSERT_TRUE(eval_dynamics(p, x, u).allFinite()) << name;
      const Vec a = full.step(x, u);
      const Vec b = half.step(half.step(x, u), u);
      ASSERT_LE((a - b).norm(), 1e-6 * std::max(1.0, b.norm())) << name;
    }
  }
}

TEST(Dynamics, ClosedLoopJacobianExamples)
{
  const auto msd = make_continuous_plant("mass_spring_damper");
  Mat A(2, 2);
  A << 0, 1, -1, -1;
  EXPECT_TRUE(closed_loop_jacobian(msd, constant_law(Vec::Zero(1)), v2(0.3, -0.2)).isApprox(A, 1e-15));
  const auto di = make_continuous_plant("double_integrator");
  Mat Z(2, 2);
  Z << 0, 1, 0, 0;
  EXPECT_TRUE(closed_loop_jacobian(di, constant_law(Vec::Constant(1, -1.0)), v2(1, 2)).isApprox(Z, 1e-15));
  const auto rb   = make_continuous_plant("rigid_body");
  const auto law  = rigid_body_backup_law(rb);
  const Mat J0    = closed_loop_jacobian(rb, law, Vec::Zero(3));
  EXPECT_TRUE(J0.isApprox(-Mat::Identity(3, 3), 1e-12));
  const Mat fd = rta::testing::central_jacobian([&](const Vec & x) { return eval_closed_loop(rb, law, x); }, Vec::Zero(3));
  EXPECT_LT((J0 - fd).norm(), 1e-8);
}

TEST(Dynamics, AnalyticJacobianMatchesFiniteDifferences)
{
  Rng rng(4);
  const auto rb  = make_continuous_plant("rigid_body");
  const auto law = rigid_body_backup_law(rb);
  const auto uni = make_continuous_plant("unicycle");
  const auto uni_law = constant_law(Vec::Constant(1, 1.0));
  for (int k = 0; k < 100; ++k) {
    const Vec x  = random_vec(rng, 3, -1.0, 1.0);
    const Mat an = closed_loop_jacobian(rb, law, x);
    const Mat fd = rta::testing::central_jacobian([&](const Vec & y) { return eval_closed_loop(rb, law, y); }, x);
    EXPECT_LE((an - fd).norm(), 1e-4 * std::max(1.0, fd.norm()));
    const Vec y   = random_vec(rng, 2, -3.0, 3.0);
    const Mat an2 = closed_loop_jacobian(uni, uni_law, y);
    const Mat fd2 = rta::testing::central_jacobian([&](const Vec & z) { return eval_closed_loop(uni, uni_law, z); }, y);
    EXPECT_LE((an2 - fd2).norm(), 1e-4 * std::max(1.0, fd2.norm()));
  }
}

TEST(Dynamics, RigidBodyEnergyIdentity)
{
  Rng rng(5);
  const auto rb = make_continuous_plant("rigid_body");
  const Eigen::Vector3d J(12, 12, 5);
  for (int k = 0; k < 1000; ++k) {
    const Vec x  = random_vec(rng, 3, -2.0, 2.0);
    const Vec u  = random_vec(rng, 3, -1.0, 1.0);
    const Vec dx = eval_dynamics(rb, x, u);
    EXPECT_LT(std::abs(2.0 * x.dot(J.asDiagonal() * dx) - 2.0 * x.dot(u)), 1e-9);
  }
}

TEST(Dynamics, CwhNaturalMotionManifoldInvariant)
{
  const auto cwh = make_continuous_plant("cwh");
  const double n = cwh.param("mean_motion");
  for (double b : {0.6, 1.0, 2.5}) {
    Vec x(5);
    x << b, 0.3, 0.5 * n * 0.3, -2.0 * n * b, 1.0;
    const auto tr = flow(cwh, constant_law(Vec::Zero(2)), x, 2.0 * M_PI / n, 1.0);
    const Vec & y = tr.back();
    const double defect = std::hypot(y[2] - 0.5 * n * y[1], y[3] + 2.0 * n * y[0]);
    EXPECT_LT(defect, 1e-3 * y.norm());
  }
}

TEST(Dynamics, CwhFuelBurnsAbsoluteThrust)
{
  const auto cwh = make_continuous_plant("cwh");
  Vec x          = Vec::Zero(5);
  x[4]           = 1.0;
  EXPECT_DOUBLE_EQ(eval_dynamics(cwh, x, Eigen::Vector2d(0.2, -0.3))[4], -0.5);
}
