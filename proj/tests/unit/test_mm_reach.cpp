#include "oracles.hpp"
#include "rtakit/mm_reach.hpp"
#include "rtakit/scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rta;

namespace {

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }
const Box kNoW(Vec(0), Vec(0));

}  // namespace

TEST(MmReach, Corners)
{
  const auto c1 = corners(Hyperrectangle(Vec::Zero(1), Vec::Ones(1)));
  ASSERT_EQ(c1.size(), 2u);
  EXPECT_EQ(c1[0][0], 0.0);
  EXPECT_EQ(c1[1][0], 1.0);
  const Vec x  = Eigen::Vector3d(1, 2, 3);
  const auto d = corners(Hyperrectangle::point(x));
  ASSERT_EQ(d.size(), 8u);
  for (const auto & c : d) { EXPECT_TRUE(c == x); }
  const auto c2 = corners(Hyperrectangle(Vec::Constant(2, -0.5), Vec::Constant(2, 0.5)));
  ASSERT_EQ(c2.size(), 4u);
  for (const auto & c : c2) { EXPECT_EQ(c.cwiseAbs(), Vec::Constant(2, 0.5)); }
  EXPECT_TRUE(c2[1] == v2(0.5, -0.5));
}

TEST(MmReach, EmbeddingExamples)
{
  const auto d   = mm_example_decomposition();
  const auto emb = build_embedding(d, kNoW);
  Vec e          = emb(v2(0, 1), v2(0, 1));
  Vec expect(4);
  expect << 3, 0, 3, 0;
  EXPECT_TRUE(e.isApprox(expect));
  EXPECT_DOUBLE_EQ(emb(v2(0, -1), v2(0, 1))[0], 2.0);
  Rng rng(41);
  for (int k = 0; k < 100; ++k) {
    const Vec x = rta::testing::random_vec(rng, 2, -2.0, 2.0);
    const Vec s = emb(x, x);
    EXPECT_TRUE(s.head(2).isApprox(d.F(x, Vec(0))));
    EXPECT_TRUE(s.tail(2).isApprox(d.F(x, Vec(0))));
  }
}

TEST(MmReach, ScalarDecayClosedForm)
{
  const auto d  = scalar_decay_decomposition();
  const auto r  = reach_overapprox(d, kNoW, Hyperrectangle(Vec::Ones(1), Vec::Constant(1, 2.0)), 1.0, 0.001);
  EXPECT_NEAR(r.lower[0], std::exp(-1.0), 1e-6);
  EXPECT_NEAR(r.upper[0], 2.0 * std::exp(-1.0), 1e-6);
  const Hyperrectangle r0(v2(-0.5, -0.5), v2(0.5, 0.5));
  const auto same = reach_overapprox(mm_example_decomposition(), kNoW, r0, 0.0, 0.01);
  EXPECT_TRUE(same.lower == r0.lower);
  EXPECT_TRUE(same.upper == r0.upper);
}

TEST(MmReach, ContainmentAtSeveralTimes)
{
  const auto mm = mm_example_decomposition();
  const Hyperrectangle r0(v2(-0.5, -0.5), v2(0.5, 0.5));
  const auto dd = disturbed_double_integrator_backup_decomposition();
  const Box W   = Box::symmetric(1, 0.2);
  const Hyperrectangle r1(v2(-1.1, -0.1), v2(-0.9, 0.1));
  for (double t : {0.25, 0.5, 1.0}) {
    const auto a = monte_carlo_containment(mm, kNoW, r0, t, 0.01, 1000, 42);
    EXPECT_TRUE(a.passed()) << "mm_example t=" << t << ": " << a.contained;
    for (Eigen::Index i = 0; i < 2; ++i) {
      // tightness telemetry: the over-approximation is not absurdly loose
      EXPECT_LT(a.over.upper[i] - a.over.lower[i], 4.0 * (a.hull.upper[i] - a.hull.lower[i]) + 1e-9);
    }
    const auto b = monte_carlo_containment(dd, W, r1, t, 0.01, 1000, 43);
    EXPECT_TRUE(b.passed()) << "disturbed DI t=" << t << ": " << b.contained;
  }
}

TEST(MmReach, ShippedDecompositionsValidate)
{
  EXPECT_TRUE(validate_decomposition(mm_example_decomposition(), Box::symmetric(2, 3.0), kNoW, 10000, 44).passed());
  EXPECT_TRUE(validate_decomposition(disturbed_double_integrator_backup_decomposition(), Box::symmetric(2, 3.0),
    Box::symmetric(1, 0.2), 10000, 45)
                .passed());
  EXPECT_TRUE(validate_decomposition(scalar_decay_decomposition(), Box::symmetric(1, 3.0), kNoW, 2000, 46).passed());
}

TEST(MmReach, ValidatorRejectsBadDecomposition)
{
  DecompositionFunction bad = scalar_decay_decomposition();
  bad.d = [](const Vec & x, const Vec &, const Vec & xh, const Vec &) -> Vec { return -x + 0.5 * (xh - x); };
  EXPECT_FALSE(validate_decomposition(bad, Box::symmetric(1, 3.0), kNoW, 500, 47).passed());
}

TEST(MmReach, EmbeddingOrderPreserved)
{
  const auto d   = mm_example_decomposition();
  const auto emb = build_embedding(d, kNoW);
  const auto et  = flow_embedding(emb.E, Hyperrectangle(v2(-0.5, -0.5), v2(0.5, 0.5)), 1.0, 0.01);
  EXPECT_TRUE(et.order_preserved());
  for (std::size_t k = 0; k < et.stacked.size(); ++k) {
    const Vec & s = et.stacked.states[k];
    EXPECT_TRUE(Hyperrectangle::is_ordered(s.head(2), s.tail(2)));
  }
}

TEST(MmReach, InversionRaisesNamingTime)
{
  DecompositionFunction inv = scalar_decay_decomposition();
  // stiff contraction of the width; RK4 at a coarse step overshoots and flips the edges
  inv.d = [](const Vec & x, const Vec &, const Vec & xh, const Vec &) -> Vec { return 100.0 * (xh - x); };
  try {
    reach_overapprox(inv, kNoW, Hyperrectangle(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)), 1.0, 0.1);
    FAIL() << "expected NumericError";
  } catch (const NumericError & e) {
    EXPECT_NE(std::string(e.what()).find("t="), std::string::npos) << e.what();
  }
}

TEST(MmReach, LseExamples)
{
  EXPECT_DOUBLE_EQ(lse({0.37}, 10.0), 0.37);
  EXPECT_NEAR(lse({1.0, 1.0}, 1.0), 1.0 - std::log(2.0), 1e-15);
  Rng rng(48);
  for (int k = 0; k < 10000; ++k) {
    const int n     = 1 + static_cast<int>(rng.next_u64() % 32);
    const double p  = std::pow(10.0, rng.uniform(-2.0, 4.0));
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto & e : v) { e = rng.uniform(-100.0, 100.0); }
    const double mn = *std::min_element(v.begin(), v.end());
    const double l  = lse(v, p);
    ASSERT_LE(l, mn + 1e-12 * std::max(1.0, std::abs(mn)));
    ASSERT_GE(l, mn - std::log(static_cast<double>(n)) / p - 1e-12 * std::max(1.0, std::abs(mn)));
  }
}

TEST(MmReach, LseOverCorners)
{
  const auto cfg = make_scenario("mm_reach_demo");
  const IntersectionSet h(quadratic_set("lin", SetRole::backup, QuadraticForm{Mat::Zero(2, 2), v2(1.0, -2.0), 0.5}));
  const Vec x = v2(0.3, -0.2);
  const double p = 1e3;
  EXPECT_NEAR(lse_h(h, Hyperrectangle::point(x), p), h.margin(x) - 2.0 / p * std::log(2.0), 1e-12);
  const Hyperrectangle r(v2(-0.4, 0.1), v2(0.2, 0.6));
  double mn = std::numeric_limits<double>::infinity();
  for (const auto & c : corners(r)) { mn = std::min(mn, h.margin(c)); }
  EXPECT_LT(std::abs(lse_h(h, r, 1e4) - mn), 1e-3);
  EXPECT_LE(lse_h(h, r, 1e4), mn);
  (void) cfg;
}

TEST(MmReach, PsiExamples)
{
  const auto d = disturbed_double_integrator_backup_decomposition();
  const auto bs = double_integrator_backup();
  const Vec x   = v2(-3.0, -0.5);
  PsiOptions opt;
  opt.horizon = 0.0;
  const auto a = psi(bs, d, Box(Vec::Zero(1), Vec::Zero(1)), x, opt);
  EXPECT_NEAR(a.value, bs.margin(x) - 2.0 / opt.p * std::log(2.0), 1e-12);
  opt.horizon = 1.0;
  const auto b = psi(bs, d, Box::symmetric(1, 0.01), x, opt);
  EXPECT_GT(b.value, 0.0);
  EXPECT_FALSE(b.inverted);
}
