#include <gtest/gtest.h>

#include <cmath>

#include "clogsim/observables.hpp"
#include "clogsim/simulation.hpp"
#include "support.hpp"

using namespace clogsim;

namespace {

MacroState state_with(const MacroGrid& g, double u, double v, double r) {
  MacroState s;
  s.u.assign(2, std::vector<double>(g.nodes(), u));
  s.v.assign(g.nodes(), v);
  s.r.assign(g.nodes(), r);
  s.clogged.assign(g.nodes(), 0);
  return s;
}

}  // namespace

TEST(Masses, PartitionOfUnityAndEndHat) {
  const MacroGrid g(8);
  auto s = state_with(g, 1.0, 0.0, 0.1);
  const auto m = masses(g, s);
  EXPECT_NEAR(m.U[0], 1.0, 1e-15);
  EXPECT_EQ(m.V, 0.0);
  std::vector<double> e0(g.nodes(), 0.0);
  e0[0] = 1.0;
  EXPECT_DOUBLE_EQ(integrate(g, e0), g.h() / 2);
  const auto z = masses(g, state_with(g, 0.0, 0.0, 0.1));
  EXPECT_EQ(z.total(), 0.0);
}

TEST(Masses, MatchesMassMatrixWeighting) {
  const MacroGrid g(7);
  std::vector<double> a(g.nodes());
  for (int j = 0; j < g.nodes(); ++j) a[j] = std::exp(g.x(j));
  const auto Ba = assemble_mass(g).apply(a);
  double s = 0.0;
  for (const double x : Ba) s += x;
  EXPECT_NEAR(integrate(g, a), s, 1e-15);
}

TEST(Porosity, FieldValues) {
  const MacroGrid g(2);
  auto s = state_with(g, 0.0, 0.0, 0.88);
  s.r[1] = kSqrt2;
  s.r[2] = kRMin;
  const auto phi = porosity_field(s, MicroConfig::ConfigA);
  EXPECT_NEAR(phi[0], 0.3918, 5e-4);
  EXPECT_NEAR(phi[1], 0.0, 1e-12);
  EXPECT_NEAR(phi[2], 1.0, 1e-11);
}

TEST(ClogDetection, EventsAndTriggers) {
  const MacroGrid g(4);
  auto prev = state_with(g, 0.0, 0.0, 1.3);
  prev.t = 1.0;
  auto next = prev;
  next.t = 1.002;
  EXPECT_TRUE(detect_clogs(g, prev, next).empty());
  next.clogged[2] = 1;
  next.r[2] = 1.41421;
  next.clogged[4] = 1;
  next.r[4] = kSqrt2;
  const auto ev = detect_clogs(g, prev, next);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].node, 2);
  EXPECT_DOUBLE_EQ(ev[0].x, 0.5);
  EXPECT_DOUBLE_EQ(ev[0].time, 1.001);
  EXPECT_EQ(ev[0].trigger, ClogTrigger::AreaFloor);
  EXPECT_EQ(ev[1].trigger, ClogTrigger::RadiusThreshold);
  EXPECT_TRUE(detect_clogs(g, next, next).empty());
  EXPECT_EQ(to_string(ClogTrigger::AreaFloor), "AreaFloor");
}

TEST(Storage, ZeroAtStartAndUniformGrowth) {
  const MacroGrid g(10);
  const auto init = state_with(g, 0.0, 0.2, 0.1);
  const auto zero = storage_indicators(g, init, init);
  EXPECT_EQ(zero.sc_global, 0.0);
  for (const double x : zero.sc_local) EXPECT_EQ(x, 0.0);
  auto later = init;
  for (double& v : later.v) v += 0.05;
  const auto sc = storage_indicators(g, later, init);
  for (const double x : sc.sc_local) EXPECT_NEAR(x, 0.05, 1e-15);
  EXPECT_NEAR(sc.sc_global, 0.05, 1e-15);
  EXPECT_NEAR(sc.sc_global, integrate(g, sc.sc_local), 1e-12);
}

TEST(Storage, LocalIndicatorMonotoneUnderGrowthOnlyAndFrozenAfterClog) {
  const MacroGrid g(20);
  MacroProblem prob;
  prob.params.growth_only = true;
  prob.params.alpha = 2.0;
  prob.table = &fixtures::default_table(MicroConfig::ConfigA);
  prob.schedule.t0 = 3.0;
  auto init = state_with(g, 0.0, 0.0, 0.9);
  init.u.assign(3, std::vector<double>(g.nodes(), 0.0));
  std::vector<double> clog_v(g.nodes(), -1.0);
  auto cur = init;
  std::vector<double> prev_sc(g.nodes(), 0.0);
  for (int k = 0; k < 1500; ++k) {
    const auto next = step(g, cur, 1e-3, prob);
    const auto sc = storage_indicators(g, next, init);
    for (int j = 0; j < g.nodes(); ++j) {
      EXPECT_GE(sc.sc_local[j], prev_sc[j]);
      if (cur.clogged[j]) {
        EXPECT_EQ(sc.sc_local[j], prev_sc[j]);
      }
    }
    prev_sc = sc.sc_local;
    cur = next;
  }
  EXPECT_TRUE(cur.clogged[0]);
}

TEST(Storage, RunRecordsGlobalIndicator) {
  const MacroGrid g(20);
  MacroProblem prob;
  prob.table = &fixtures::default_table(MicroConfig::ConfigA);
  MacroState init = state_with(g, 0.0, 0.0, 0.1);
  init.u.assign(3, std::vector<double>(g.nodes(), 0.0));
  RunSettings set;
  set.T = 0.2;
  set.record_interval = 0.05;
  const auto res = run(g, prob, init, set);
  for (const auto& rec : res.masses) EXPECT_NEAR(rec.sc_global, rec.m.V, 1e-15);
}
