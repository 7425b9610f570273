#include "oracles.hpp"
#include "rtakit/filters.hpp"
#include "rtakit/harness.hpp"
#include "rtakit/qp_oracle.hpp"
#include "rtakit/scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rta;

namespace {

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }
Vec u1(double u) { return Vec::Constant(1, u); }

FilterConfig scenario_filter(const std::string & id, FilterKind k, double buffer = 0.0)
{
  ScenarioOverrides ov;
  ov.filter         = k;
  ov.barrier_buffer = buffer;
  return make_scenario(id, ov).filter;
}

std::pair<double, double> feasible_interval(const std::vector<LinearConstraint> & cs, double lo, double hi)
{
  for (const auto & c : cs) {
    if (c.a[0] > 0.0) { lo = std::max(lo, -c.b / c.a[0]); }
    else if (c.a[0] < 0.0) { hi = std::min(hi, -c.b / c.a[0]); }
    else if (c.b < 0.0) { return {1.0, -1.0}; }
  }
  return {lo, hi};
}

}  // namespace

TEST(Filters, AlphaFunctions)
{
  EXPECT_DOUBLE_EQ((AlphaFunction{AlphaKind::linear, 2.0})(1.5), 3.0);
  EXPECT_DOUBLE_EQ((AlphaFunction{AlphaKind::cubic, 1.0})(-2.0), -8.0);
  EXPECT_DOUBLE_EQ((AlphaFunction{AlphaKind::tanh, 1.0})(0.0), 0.0);
  EXPECT_THROW(parse_filter_kind("bogus"), UsageError);
  for (const auto & n : filter_names()) { EXPECT_EQ(to_string(parse_filter_kind(n)), n); }
}

TEST(Filters, RbsfExamples)
{
  const auto cfg = scenario_filter("double_integrator", FilterKind::rbsf);
  const auto a   = rbsf(cfg, v2(-3, 0), u1(1.0));
  EXPECT_FALSE(a.intervened);
  EXPECT_EQ(a.u_act[0], 1.0);
  EXPECT_NEAR(a.margin, 5.98, 1e-12);
  const auto b = rbsf(cfg, v2(-0.02, 0.2), u1(1.0));
  EXPECT_TRUE(b.intervened);
  EXPECT_EQ(b.mode, FilterMode::backup);
  EXPECT_EQ(b.u_act[0], -1.0);
  EXPECT_NEAR(b.margin, -0.1, 1e-12);
  const auto c = rbsf(cfg, v2(-50, 0), u1(0.0));
  EXPECT_FALSE(c.intervened);
  EXPECT_EQ(c.u_act[0], 0.0);
}

TEST(Filters, SbsfExamples)
{
  const auto cfg = scenario_filter("double_integrator", FilterKind::sbsf);
  EXPECT_FALSE(sbsf(cfg, v2(-3, 0), u1(1.0)).intervened);
  const auto b = sbsf(cfg, v2(-0.05, 0.3), u1(1.0));
  EXPECT_TRUE(b.intervened);
  EXPECT_EQ(b.u_act[0], -1.0);
  // stopping point of the candidate exceeds the wall
  const Vec cand = rta::testing::di_zoh(v2(-0.05, 0.3), 1.0, 0.1);
  EXPECT_GT(rta::testing::di_stopping_point(cand[0], cand[1]), 0.0);
  Filter f(cfg);
  Vec x = v2(-1.0, -0.2);
  for (int k = 0; k < 50; ++k) {
    const auto out = f.step(0.1 * k, x, u1(-1.0));
    EXPECT_FALSE(out.intervened);
    x = cfg.discrete->step(x, out.u_act);
  }
}

TEST(Filters, EasifExamples)
{
  const auto cfg = scenario_filter("double_integrator", FilterKind::easif);
  const auto a   = easif(cfg, v2(-10, 0), u1(1.0));
  EXPECT_FALSE(a.intervened);
  EXPECT_EQ(a.u_act[0], 1.0);
  const auto b = easif(cfg, v2(-2, 2), u1(1.0));
  EXPECT_TRUE(b.intervened);
  EXPECT_NEAR(b.u_act[0], -1.0, 1e-12);
  EXPECT_NEAR(b.u_act[0], rta::testing::grid_min_1d(1.0, -1.0, 1.0, {{-4.0, -4.0}}, 1e-5), 1e-9);
  const auto rb = scenario_filter("rigid_body", FilterKind::easif);
  const Vec ud  = Eigen::Vector3d(0.7, -1.0, 0.2);
  const auto c  = easif(rb, Vec::Zero(3), ud);
  EXPECT_FALSE(c.intervened);
  EXPECT_TRUE(c.u_act.isApprox(ud));
}

TEST(Filters, IasifPassesDeepInside)
{
  for (const char * id : {"double_integrator", "mass_spring_damper", "rigid_body", "two_cart"}) {
    const auto cfg = scenario_filter(id, FilterKind::iasif);
    const Vec x    = std::string(id) == "double_integrator" ? v2(-10, 0)
                     : std::string(id) == "two_cart"        ? Vec(Eigen::Vector4d(0, 0, 10, 0))
                                                            : Vec(Vec::Zero(cfg.plant.n));
    const Vec ub   = cfg.backup(x);
    const auto out = iasif(cfg, x, ub);
    EXPECT_FALSE(out.intervened) << id;
    EXPECT_LE((out.u_act - ub).norm(), 1e-9) << id;
  }
}

TEST(Filters, IasifBuildsOneConstraintPerSampleAndTerminal)
{
  const auto cfg = scenario_filter("double_integrator", FilterKind::iasif);
  SensitivityTrajectory st;
  const auto cs = iasif_constraints(cfg, v2(-2, 0.5), &st);
  const std::size_t samples = st.base.size();
  EXPECT_EQ(samples, 61u);
  EXPECT_EQ(cs.size(), samples * cfg.constraint.members.size() + cfg.backup_set.members.size());
}

TEST(Filters, RasifExamples)
{
  auto cfg     = scenario_filter("disturbed_double_integrator", FilterKind::rasif);
  cfg.safe_set = double_integrator_viability_smooth(1.0);
  cfg.nondet->w_box = Box::symmetric(1, 0.2);
  const auto a      = rasif(cfg, v2(-2, 2), u1(1.0));
  EXPECT_EQ(a.mode, FilterMode::qp_infeasible_fallback);
  EXPECT_EQ(a.u_act[0], -1.0);

  // h = 4 - 2.25 = 1.75; binding vertex w = +0.1: -3 - 3u - 0.3 + 1.75 >= 0
  cfg.nondet->w_box = Box::symmetric(1, 0.1);
  const auto b      = rasif(cfg, v2(-2, 1.5), u1(1.0));
  const double expect = (-3.0 - 0.3 + 1.75) / 3.0;
  EXPECT_NEAR(b.u_act[0], expect, 1e-12);
  EXPECT_NEAR(b.u_act[0], -0.5166666666666667, 1e-12);
  EXPECT_NEAR(b.u_act[0], rta::testing::grid_min_1d(1.0, -1.0, 1.0, {{-3.0, -3.3 + 1.75}, {-3.0, -2.7 + 1.75}}, 1e-5), 1e-5);
}

TEST(Filters, RasifWithZeroWidthEqualsEasif)
{
  auto robust = scenario_filter("disturbed_double_integrator", FilterKind::rasif);
  robust.nondet->w_box = Box(Vec::Zero(1), Vec::Zero(1));
  auto expl            = robust;
  expl.kind            = FilterKind::easif;
  Rng rng(31);
  for (int k = 0; k < 200; ++k) {
    const Vec x  = v2(rng.uniform(-3.0, 0.0), rng.uniform(-2.0, 2.0));
    const Vec ud = u1(rng.uniform(-1.0, 1.0));
    EXPECT_LE((rasif(robust, x, ud).u_act - easif(expl, x, ud).u_act).norm(), 1e-9);
  }
}

TEST(Filters, RobustnessShrinksFeasibleInterval)
{
  const auto base = scenario_filter("disturbed_double_integrator", FilterKind::rasif);
  Rng rng(32);
  for (int k = 0; k < 200; ++k) {
    const Vec x = v2(rng.uniform(-3.0, 0.0), rng.uniform(-2.0, 2.0));
    std::pair<double, double> prev{-1.0, 1.0};
    for (double w : {0.0, 0.05, 0.1, 0.2, 0.4}) {
      auto cfg          = base;
      cfg.nondet->w_box = Box::symmetric(1, w);
      const auto iv     = feasible_interval(rasif_constraints(cfg, x), -1.0, 1.0);
      if (iv.first > iv.second) {
        prev = iv;
        continue;
      }
      ASSERT_LE(prev.first, prev.second) << "a larger W became feasible again";
      EXPECT_GE(iv.first, prev.first - 1e-12);
      EXPECT_LE(iv.second, prev.second + 1e-12);
      prev = iv;
    }
  }
}

TEST(Filters, EasifIsMinimallyInvasive)
{
  const auto cfg = scenario_filter("double_integrator", FilterKind::easif, 0.0);
  Rng rng(33);
  int checked = 0;
  for (int k = 0; k < 300; ++k) {
    const Vec x   = v2(rng.uniform(-3.0, 0.0), rng.uniform(-2.0, 2.0));
    const double ud = rng.uniform(-1.0, 1.0);
    const auto out  = easif(cfg, x, u1(ud));
    if (out.mode == FilterMode::qp_infeasible_fallback) { continue; }
    std::vector<std::pair<double, double>> cons;
    for (const auto & c : easif_constraints(cfg, x)) { cons.emplace_back(c.a[0], c.b); }
    bool feasible      = false;
    const double ugrid = rta::testing::grid_min_1d(ud, -1.0, 1.0, cons, 1e-4, &feasible);
    ASSERT_TRUE(feasible);
    EXPECT_LE(std::abs(out.u_act[0] - ud), std::abs(ugrid - ud) + 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(Filters, OutputsStayInInputBox)
{
  for (const auto & info : scenario_catalog()) {
    for (FilterKind k : info.filters) {
      ScenarioOverrides ov;
      ov.filter      = k;
      ov.duration    = 5.0;
      const auto cfg = make_scenario(info.id, ov);
      const auto res = run_closed_loop(cfg);
      for (const auto & r : res.records) {
        ASSERT_TRUE(cfg.filter.plant.u_box.contains(r.u_act, 1e-12)) << info.id << " " << to_string(k) << " t=" << r.t;
      }
    }
  }
}

TEST(Filters, MmAsifPassesWhenSlack)
{
  auto cfg          = scenario_filter("disturbed_double_integrator", FilterKind::mmasif);
  cfg.nondet->w_box = Box(Vec::Zero(1), Vec::Zero(1));
  const auto out    = mm_asif(cfg, v2(-6, -0.5), u1(0.1));
  EXPECT_FALSE(out.intervened) << out.diagnostic;
  EXPECT_NEAR(out.u_act[0], 0.1, 1e-9);
  EXPECT_GT(out.margin, 0.0);
}

TEST(Filters, BarrierBufferValidation)
{
  auto cfg           = scenario_filter("double_integrator", FilterKind::easif);
  cfg.barrier_buffer = -1.0;
  EXPECT_THROW(cfg.validate(), UsageError);
}

TEST(Filters, LatchRules)
{
  LatchRule instant;
  LatchState s;
  s = latch_update(s, instant, true, 0.0, false);
  EXPECT_TRUE(s.latched);
  s = latch_update(s, instant, false, 0.1, false);
  EXPECT_FALSE(s.latched);
  EXPECT_THROW(latch_update(s, instant, false, 0.05, false), UsageError);

  LatchRule hold{ReleaseRule::min_hold, 1.0, {}};
  LatchState h;
  int latched_steps = 0;
  for (int k = 0; k < 30; ++k) {
    h = latch_update(h, hold, k == 0, 0.1 * k, false);
    latched_steps += h.latched ? 1 : 0;
  }
  EXPECT_GE(latched_steps, 10);

  LatchRule cond{ReleaseRule::condition, 0.0, {}};
  LatchState c = latch_update(LatchState{}, cond, true, 0.0, false);
  c            = latch_update(c, cond, false, 0.1, false);
  EXPECT_TRUE(c.latched);
  c = latch_update(c, cond, false, 0.2, true);
  EXPECT_FALSE(c.latched);
}

TEST(Filters, ConditionLatchReleasesOnBackupSetEntry)
{
  ScenarioOverrides ov;
  ov.filter          = FilterKind::rbsf;
  auto cfg           = make_scenario("double_integrator", ov);
  const auto backup  = cfg.filter.backup_set;
  cfg.filter.latch   = LatchRule{ReleaseRule::condition, 0.0, [backup](const Vec & x) { return backup.contains(x); }};
  Filter f(cfg.filter);
  Vec x          = v2(-0.3, 0.7);
  bool released  = false;
  for (int k = 0; k < 40 && !released; ++k) {
    const bool member_before = backup.contains(x);
    const auto out           = f.step(0.1 * k, x, u1(1.0));
    if (k > 0 && !f.latch().latched) {
      EXPECT_TRUE(member_before);
      released = true;
    }
    x = cfg.filter.discrete->step(x, out.u_act);
  }
  EXPECT_TRUE(released);
}
