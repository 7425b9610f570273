#include "oracles.hpp"
#include "rtakit/integration.hpp"
#include "rtakit/scenarios.hpp"
#include "rtakit/sets.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rta;
using rta::testing::random_vec;

namespace {

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }

Vec cwh_state(double a, double b, double c, double d, double e)
{
  Vec x(5);
  x << a, b, c, d, e;
  return x;
}

SafeBackwardImageSpec di_sbi(int samples)
{
  SafeBackwardImageSpec s;
  s.constraint = double_integrator_constraint();
  s.backup_set = double_integrator_backup();
  s.backup     = constant_law(Vec::Constant(1, -1.0));
  s.horizon    = 3.0;
  s.samples    = samples;
  return s;
}

}  // namespace

TEST(Sets, ConstraintExamples)
{
  EXPECT_DOUBLE_EQ(double_integrator_constraint().margin(v2(-2, 5)), 2.0);
  EXPECT_NEAR(cwh_constraint(0.5).margin(cwh_state(0.3, 0.4, 0, 0, 1)), 0.0, 1e-15);
  const Eigen::Vector3d J(12, 12, 5);
  EXPECT_DOUBLE_EQ(rigid_body_backup_set(J, 1.0).margin(Vec::Zero(3)), rigid_body_backup_level(J, 1.0));
}

TEST(Sets, DoubleIntegratorViability)
{
  EXPECT_DOUBLE_EQ(double_integrator_viability_h(v2(-2, 0)), 2.0);
  EXPECT_NEAR(double_integrator_viability_h(v2(-2, 2)), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(double_integrator_viability_h(v2(-0.5, 2)), -3.0);
}

TEST(Sets, PiecewiseAndSmoothAgreeOnSign)
{
  Rng rng(11);
  for (int k = 0; k < 10000; ++k) {
    const Vec x      = v2(rng.uniform(-5.0, 0.0), rng.uniform(-3.0, 3.0));
    const double pw  = double_integrator_viability_h(x);
    const double smo = double_integrator_viability_h_smooth(x);
    if (x[1] >= 0.0) {
      EXPECT_EQ(pw >= 0.0, smo >= 0.0) << x.transpose();
    } else if (smo >= 0.0) {
      // the smooth barrier is an inner approximation on the braking side
      EXPECT_GE(pw, 0.0) << x.transpose();
    }
  }
}

TEST(Sets, MassSpringDamperLevelSet)
{
  const auto s = mass_spring_damper_safe_set();
  EXPECT_DOUBLE_EQ(s.margin(Vec::Zero(2)), 1.0);
  EXPECT_NEAR(s.margin(v2(1, 0)), -0.2, 1e-15);
}

TEST(Sets, UnicycleSafeSet)
{
  EXPECT_NEAR(unicycle_safe_h(v2(2, 0)), 1.0, 1e-15);
  EXPECT_NEAR(unicycle_safe_h(v2(1 + std::sin(0.5), 0.5)), 0.0, 1e-15);
}

TEST(Sets, CwhBackupMembership)
{
  const double n = 0.001027;
  EXPECT_TRUE(cwh_backup_membership(cwh_state(0, 0.6, 0, 0, 1), CwhBackup::invariant_points, 0.5, n, 1e-9));
  EXPECT_TRUE(cwh_backup_membership(cwh_state(0.6, 0, 0, -2 * n * 0.6, 1), CwhBackup::nmt_subspace, 0.5, n, 1e-9));
  for (auto which : {CwhBackup::invariant_points, CwhBackup::nmt_subspace}) {
    EXPECT_FALSE(cwh_backup_membership(cwh_state(0.2, 0, 0, 0, 1), which, 0.5, n, 1e-9));
  }
}

TEST(Sets, IntersectionMarginIsMinimum)
{
  const auto c = mass_spring_damper_constraint();
  ASSERT_EQ(c.members.size(), 4u);
  const Vec x = v2(0.3, -0.9);
  double mn   = std::numeric_limits<double>::infinity();
  for (const auto & m : c.members) { mn = std::min(mn, m.margin(x)); }
  EXPECT_DOUBLE_EQ(c.margin(x), mn);
  EXPECT_NEAR(c.margin(x), 0.1, 1e-15);
}

TEST(Sets, AnalyticGradientsMatchFiniteDifferences)
{
  Rng rng(12);
  std::vector<LevelSet> sets{double_integrator_constraint(), double_integrator_viability_smooth(1.0),
    double_integrator_viability_smooth(0.8), mass_spring_damper_safe_set(), unicycle_safe_set(), unicycle_constraint(),
    cwh_constraint(0.5), rigid_body_constraint(1.0), rigid_body_backup_set(Eigen::Vector3d(12, 12, 5), 1.0),
    two_cart_constraint()};
  for (const auto & s : sets) {
    ASSERT_TRUE(static_cast<bool>(s.grad)) << s.name;
    for (int k = 0; k < 100; ++k) {
      const Vec x  = random_vec(rng, s.n, -2.0, 2.0);
      const Vec g  = s.gradient(x);
      const Mat fd = rta::testing::central_jacobian([&](const Vec & y) { return Vec::Constant(1, s.margin(y)); }, x);
      EXPECT_LE((g - fd.row(0).transpose()).norm(), 1e-4 * std::max(1.0, g.norm())) << s.name;
    }
  }
}

TEST(Sets, SmoothMarginContinuousAlongTrajectories)
{
  const auto cfg = make_scenario("rigid_body");
  const auto tr  = flow(cfg.filter.plant, cfg.filter.backup, Eigen::Vector3d(0.5, -0.6, 0.4), 5.0, 0.005);
  const auto & h = cfg.filter.backup_set;
  for (std::size_t k = 1; k < tr.size(); ++k) {
    EXPECT_LT(std::abs(h.margin(tr.states[k]) - h.margin(tr.states[k - 1])), 0.05);
  }
}

TEST(Sets, SafeBackwardImageExamples)
{
  const auto di = make_continuous_plant("double_integrator");
  const auto s  = di_sbi(60);
  const auto in = sbi_membership(s, di, v2(-1, 1));
  EXPECT_TRUE(in.member) << in.diagnostic;
  EXPECT_NEAR(rta::testing::di_stopping_point(-1, 1), -0.5, 1e-15);
  EXPECT_FALSE(sbi_membership(s, di, v2(-0.1, 1)).member);
  EXPECT_TRUE(sbi_membership(s, di, v2(-2, -0.5)).member);
}

TEST(Sets, SafeBackwardImageRefinementIsMonotone)
{
  const auto di = make_continuous_plant("double_integrator");
  Rng rng(13);
  for (int k = 0; k < 300; ++k) {
    const Vec x = v2(rng.uniform(-4.0, 0.0), rng.uniform(-2.0, 2.0));
    const bool coarse = sbi_membership(di_sbi(30), di, x).member;
    const bool fine   = sbi_membership(di_sbi(60), di, x).member;
    // stopping-distance oracle with the epsilon buffers
    const bool oracle = x[1] <= 0.0 ? x[0] <= -1e-3 : rta::testing::di_stopping_point(x[0], x[1]) <= -1e-3;
    if (coarse) { EXPECT_TRUE(fine) << x.transpose(); }
    if (std::abs(rta::testing::di_stopping_point(x[0], std::max(0.0, x[1]))) > 0.05) { EXPECT_EQ(fine, oracle) << x.transpose(); }
  }
}

TEST(Sets, NagumoExamples)
{
  const auto msd = make_continuous_plant("mass_spring_damper");
  EXPECT_TRUE(nagumo_boundary_check(msd, constant_law(Vec::Zero(1)), mass_spring_damper_safe_set(), Vec::Zero(2), 200, 1)
                .passed());
  const auto di   = make_continuous_plant("double_integrator");
  const auto h    = double_integrator_viability_smooth(1.0);
  const auto bad  = nagumo_boundary_check(di, constant_law(Vec::Constant(1, 1.0)), h, v2(-1, 0), 200, 2);
  ASSERT_FALSE(bad.passed());
  for (const auto & v : bad.violations) { EXPECT_GT(v.x[1], 0.0); }
  EXPECT_TRUE(nagumo_boundary_check(di, constant_law(Vec::Constant(1, -1.0)), h, v2(-1, 0), 200, 3).passed());
}
