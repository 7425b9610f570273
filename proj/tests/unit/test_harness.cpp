#include "rtakit/harness.hpp"
#include "rtakit/scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

using namespace rta;

namespace {

ScenarioConfig di(FilterKind k)
{
  ScenarioOverrides ov;
  ov.filter = k;
  return make_scenario("double_integrator", ov);
}

bool same_vec(const Vec & a, const Vec & b)
{
  return a.size() == b.size()
         && std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST(Harness, BaselineCrossesAtKinematicTime)
{
  const auto r = run_closed_loop(di(FilterKind::none));
  EXPECT_TRUE(r.summary.violated);
  EXPECT_NEAR(r.summary.first_violation_time, std::sqrt(3.5), 0.05);
  EXPECT_EQ(r.summary.activation_steps, 0);
}

TEST(Harness, RbsfSafeWithActivations)
{
  const auto r = run_closed_loop(di(FilterKind::rbsf));
  EXPECT_FALSE(r.summary.violated);
  EXPECT_GE(r.summary.min_constraint_margin, -kTolSafety);
  EXPECT_GT(r.summary.activation_steps, 0);
  // fine-step rerun as an oracle for the discretization
  auto fine      = di(FilterKind::rbsf);
  fine.substeps  = 100;
  const auto r2  = run_closed_loop(fine);
  EXPECT_GE(r2.summary.min_constraint_margin, -kTolSafety);
}

TEST(Harness, MetricConsistency)
{
  for (const auto & info : scenario_catalog()) {
    for (FilterKind k : info.filters) {
      ScenarioOverrides ov;
      ov.filter      = k;
      ov.duration    = 6.0;
      const auto cfg = make_scenario(info.id, ov);
      const auto r   = run_closed_loop(cfg);
      const auto & s = r.summary;
      ASSERT_EQ(static_cast<int>(r.records.size()), s.steps);
      EXPECT_NEAR(s.activation_seconds, s.activation_steps / cfg.rate, 1e-12);
      EXPECT_EQ(s.violated, s.min_constraint_margin < -kTolSafety || s.blew_up);
      int acts          = 0;
      bool all_equal    = true;
      double max_jump   = 0.0;
      for (std::size_t i = 0; i < r.records.size(); ++i) {
        acts += r.records[i].intervened ? 1 : 0;
        all_equal = all_equal && (r.records[i].u_act - r.records[i].u_des).norm() <= 1e-12;
        if (i > 0) { max_jump = std::max(max_jump, (r.records[i].u_act - r.records[i - 1].u_act).lpNorm<Eigen::Infinity>()); }
      }
      EXPECT_EQ(acts, s.activation_steps);
      EXPECT_EQ(s.control_deviation <= 1e-12, all_equal) << info.id << " " << to_string(k);
      EXPECT_DOUBLE_EQ(s.max_input_jump, max_jump);
      if (s.first_intervention_time >= 0.0) {
        ASSERT_GT(acts, 0);
      } else {
        EXPECT_EQ(acts, 0);
      }
    }
  }
}

TEST(Harness, BackupAsPrimaryNeverActivatesSimplex)
{
  for (FilterKind k : {FilterKind::rbsf, FilterKind::sbsf}) {
    ScenarioOverrides ov;
    ov.filter  = k;
    ov.primary = constant_primary(Vec::Constant(1, -1.0));
    const auto r = run_closed_loop(make_scenario("double_integrator", ov));
    EXPECT_EQ(r.summary.activation_steps, 0);
    EXPECT_EQ(r.summary.control_deviation, 0.0);
  }
}

TEST(Harness, Deterministic)
{
  for (const char * id : {"double_integrator", "disturbed_double_integrator", "two_cart"}) {
    ScenarioOverrides ov;
    ov.seed        = 99;
    ov.duration    = 8.0;
    const auto cfg = make_scenario(id, ov);
    const auto a   = run_closed_loop(cfg);
    const auto b   = run_closed_loop(cfg);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      ASSERT_TRUE(same_vec(a.records[i].x, b.records[i].x)) << id;
      ASSERT_TRUE(same_vec(a.records[i].u_act, b.records[i].u_act)) << id;
    }
    EXPECT_EQ(std::memcmp(&a.summary.control_deviation, &b.summary.control_deviation, sizeof(double)), 0);
  }
}

TEST(Harness, DisturbanceSeedMatters)
{
  ScenarioOverrides a;
  a.filter = FilterKind::easif;
  a.seed   = 1;
  ScenarioOverrides b = a;
  b.seed              = 2;
  const auto ra = run_closed_loop(make_scenario("disturbed_double_integrator", a));
  const auto rb = run_closed_loop(make_scenario("disturbed_double_integrator", b));
  EXPECT_FALSE(same_vec(ra.records.back().x, rb.records.back().x));
}

TEST(Harness, StepGuard)
{
  ScenarioOverrides ov;
  ov.duration = 1e6;
  ov.rate     = 100.0;
  EXPECT_THROW(make_scenario("double_integrator", ov), UsageError);
}

TEST(Harness, MinHoldLatchExtendsActivation)
{
  const auto base = run_closed_loop(di(FilterKind::rbsf));
  ScenarioOverrides ov;
  ov.filter = FilterKind::rbsf;
  ov.latch  = LatchRule{ReleaseRule::min_hold, 1.0, {}};
  const auto held = run_closed_loop(make_scenario("double_integrator", ov));
  EXPECT_GE(held.summary.activation_steps, base.summary.activation_steps);
  EXPECT_GE(held.summary.min_constraint_margin, -kTolSafety);
}

TEST(Harness, SafeVolumeTrivialBoxes)
{
  const auto cfg = di(FilterKind::rbsf);
  const auto in  = safe_volume_estimate(cfg, Box(Eigen::Vector2d(-4, -2), Eigen::Vector2d(-3, -1)), 500, 5.0, 1);
  EXPECT_EQ(in.fraction, 1.0);
  const auto out = safe_volume_estimate(cfg, Box(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1, 1)), 500, 5.0, 1);
  EXPECT_EQ(out.fraction, 0.0);
}

TEST(Harness, SafeVolumeBatchMatchesPerSample)
{
  const auto cfg = di(FilterKind::rbsf);
  const Box box(Eigen::Vector2d(-4, -2), Eigen::Vector2d(0, 2));
  const auto batch = safe_volume_estimate(cfg, box, 400, 10.0, 5, true);
  const auto slow  = safe_volume_estimate(cfg, box, 400, 10.0, 5, false);
  EXPECT_TRUE(batch.used_batch_kernel);
  EXPECT_FALSE(slow.used_batch_kernel);
  EXPECT_LE(std::abs(batch.safe - slow.safe), 2);
  const auto asif = safe_volume_estimate(di(FilterKind::easif), box, 50, 5.0, 5, true);
  EXPECT_FALSE(asif.used_batch_kernel);
}

TEST(Harness, ActivationGap)
{
  EXPECT_EQ(activation_gap({}, {}), 0);
  EXPECT_EQ(activation_gap({1, 2, 3}, {1, 2, 3}), 0);
  EXPECT_EQ(activation_gap({1, 5}, {2, 5}), 1);
  EXPECT_EQ(activation_gap({1, 10}, {1}), 9);
}

TEST(Harness, CompareFiltersOnDoubleIntegrator)
{
  const auto t = compare_filters(
    "double_integrator", {FilterKind::rbsf, FilterKind::sbsf, FilterKind::easif, FilterKind::iasif});
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_TRUE(t.all_safe);
  EXPECT_GE(t.simplex_activation_gap, 0);
  EXPECT_LE(t.simplex_activation_gap, 2);
  EXPECT_TRUE(t.easif_intervenes_first);
  EXPECT_THROW(compare_filters("double_integrator", {FilterKind::rasif}), UsageError);
}
