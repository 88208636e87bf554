#include <gtest/gtest.h>

#include <cmath>

#include "tlc/ipa.hpp"
#include "tlc/sample.hpp"

using namespace tlc;

namespace {

void expect_vec(const Vec4& got, const Vec4& want, double tol = 1e-12) {
  for (int j = 0; j < kRoads; ++j) EXPECT_NEAR(got[j], want[j], tol) << "j=" << j;
}

Snapshot base_snapshot(double t) {
  Snapshot s;
  s.time = t;
  s.green = {true, true, false, false};
  s.h_obs = {1.2, 1.3, 1.2, 1.1};
  s.alpha_obs = {0.41, 0, 0.45, 0.32};
  return s;
}

EventRecord rec(EventKind k, double t, int q, int burst = -1, int kk = 0, bool final = false) {
  EventRecord r;
  r.kind = k;
  r.time = t;
  r.queue = q;
  r.burst = burst;
  r.k = kk;
  r.final = final;
  return r;
}

BurstView burst(int id, double content, bool open) {
  BurstView b;
  b.id = id;
  b.content = content;
  b.open = open;
  return b;
}

}  // namespace

TEST(BoundaryUpdate, ContinuousDynamicsLeaveDerivative) {
  expect_vec(boundary_update(-0.7, -0.7, {1, 2, 3, 4}, {1, 1, 1, 1}), {1, 2, 3, 4});
}

TEST(BoundaryUpdate, ExogenousEventLeavesDerivative) {
  expect_vec(boundary_update(-0.7, 0.45, {1, 2, 3, 4}, {0, 0, 0, 0}), {1, 2, 3, 4});
}

TEST(BoundaryUpdate, PlugInValue) {
  // (-0.7 - 0.45) * 1
  expect_vec(boundary_update(0.45 - 1.15, 0.45, {0, 0, 0, 0}, {1, 0, 0, 0}), {-1.15, 0, 0, 0});
}

TEST(EndogenousTauPrime, EmptyingTime) {
  const Vec4 xp{0.3, -0.2, 0.0, 1.0};
  const double f = 0.41 - 1.2;
  const auto tp = endogenous_tau_prime(1.0, {}, f, xp);
  ASSERT_TRUE(tp);
  for (int j = 0; j < kRoads; ++j) EXPECT_NEAR((*tp)[j], -xp[j] / f, 1e-15);
}

// g = z_2 - theta_2 with dz/dt = 1 and z' = -rho'.
TEST(EndogenousTauPrime, GreenToRedOfRoadTwo) {
  const Vec4 rho{0.0, 0.0, 0.0, 1.0};
  const auto tp = endogenous_tau_prime(1.0, {0, -1, 0, 0}, 1.0, -1.0 * rho);
  ASSERT_TRUE(tp);
  expect_vec(*tp, Vec4{0, 1, 0, 1});
}

TEST(EndogenousTauPrime, ZeroInputsAndSingular) {
  expect_vec(*endogenous_tau_prime(1.0, {}, -0.5, {}), {0, 0, 0, 0});
  EXPECT_FALSE(endogenous_tau_prime(1.0, {}, 0.0, {1, 0, 0, 0}).has_value());
}

TEST(ClosedFormSigma, ReducesToSigmaZero) {
  const Vec4 s0{0.5, -1, 0, 2};
  expect_vec(closed_form_sigma_prime(0.0, {}, {3, 3, 3, 3}, s0, 1.0), s0);
  expect_vec(closed_form_sigma_prime(0.0, {}, {}, {}, 1.0), {0, 0, 0, 0});
}

TEST(ClosedFormSigma, PlugInValue) {
  const auto s = closed_form_sigma_prime(-1.3, {0.5, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}, 1.0);
  EXPECT_NEAR(s[0], 1.8, 1e-12);
}

// Unrolled recursion: sigma_k' = sigma_{k-1}' + delta'/v with
// delta' = Lv (xbar' - x2'(sigma_k) - x2dot sigma_k').
TEST(ClosedFormSigma, AgreesWithRecursionOnOneStep) {
  const double v = 1.0, lv = 1.0;
  const Vec4 s0{1, 0, 0, 0};
  const Vec4 x2_at0{0.2, 0.1, 0, 0};
  const double x2dot0 = -1.3;
  const Vec4 xbar = x2_at0 + x2dot0 * s0;
  const Vec4 delta0 = -lv * xbar;
  // The first check: sigma_1' = sigma_0' + (L - Lv x2(sigma_0))'/v.
  const Vec4 s1 = recursive_sigma_prime(s0, delta0, v);
  expect_vec(s1, closed_form_sigma_prime(x2dot0, x2_at0, s0, s0, v, lv));
}

TEST(IpaEngine, EmptyingResetsRow) {
  IpaEngine ipa(NetworkConfig{}, InflowModel::kImpulse);
  auto s0 = base_snapshot(0.0);
  s0.green = {false, true, true, false};
  s0.busy[2] = true;
  s0.x[2] = 2.0;
  ipa.on_start(s0);
  auto pre = s0;
  pre.time = 5.0;
  pre.x[2] = 0.0;
  auto post = pre;
  post.busy[2] = false;
  ipa.on_step(EventStep{{rec(EventKind::kEnd, 5.0, 2)}, pre, post});
  expect_vec(ipa.row(2), {0, 0, 0, 0});
}

// G2R_1 with road 1 non-empty: x_1' -= h_1 tau', tau' = e_1 + rho' (rho' = 0
// for the first cycle); the open burst stops growing and gains h_1 tau'.
TEST(IpaEngine, GreenToRedOfBusyRoadOne) {
  IpaEngine ipa(NetworkConfig{}, InflowModel::kImpulse);
  auto s0 = base_snapshot(0.0);
  s0.busy[0] = true;
  s0.x[0] = 60.0;
  s0.bursts.push_back(burst(0, 0.0, true));
  ipa.on_start(s0);
  auto pre = s0;
  pre.time = 40.0;
  auto post = pre;
  post.green = {false, true, true, false};
  post.bursts[0].open = false;
  ipa.on_step(EventStep{{rec(EventKind::kGreenToRed, 40, 0), rec(EventKind::kRedToGreen, 40, 2)}, pre, post});
  expect_vec(ipa.last_tau_prime(), {1, 0, 0, 0});
  expect_vec(ipa.row(0), {-1.2, 0, 0, 0});
  expect_vec(ipa.row(kTransit), {1.2, 0, 0, 0});
  expect_vec(ipa.light_clock_prime(2), {-1, 0, 0, 0});
}

TEST(IpaEngine, ExogenousStartLeavesDerivatives) {
  IpaEngine ipa(NetworkConfig{}, InflowModel::kImpulse);
  auto s0 = base_snapshot(0.0);
  ipa.on_start(s0);
  auto pre = s0;
  pre.time = 3.0;
  auto post = pre;
  post.busy[2] = true;
  post.x[2] = 1.0;
  ipa.on_step(EventStep{{rec(EventKind::kArrival, 3, 2), rec(EventKind::kGamma, 3, 2), rec(EventKind::kStart, 3, 2)},
                        pre, post});
  for (int q = 0; q < kQueues; ++q) expect_vec(ipa.row(q), {0, 0, 0, 0});
}

// Burst built during [0, 40) joins queue 2 while road 2 is red: x_2' gains
// exactly the burst derivative, and the transit row empties.
TEST(IpaEngine, JoinOnRedAddsBurstDerivative) {
  IpaEngine ipa(NetworkConfig{}, InflowModel::kImpulse);
  auto s0 = base_snapshot(0.0);
  s0.green = {true, false, false, true};
  s0.busy[0] = true;
  s0.x[0] = 60.0;
  s0.bursts.push_back(burst(0, 0.0, true));
  ipa.on_start(s0);
  auto pre = s0;
  pre.time = 40.0;
  auto post = pre;
  post.green = {false, false, true, true};
  post.bursts[0].open = false;
  ipa.on_step(EventStep{{rec(EventKind::kGreenToRed, 40, 0), rec(EventKind::kRedToGreen, 40, 2)}, pre, post});
  const Vec4 y = ipa.row(kTransit);
  const Vec4 x2 = ipa.row(1);
  auto jpre = post;
  jpre.time = 50.0;
  auto jpost = jpre;
  jpost.bursts.clear();
  jpost.busy[1] = true;
  jpost.x[1] = 48.0;
  ipa.on_step(EventStep{{rec(EventKind::kJoin, 50, kTransit, 0, 1, true), rec(EventKind::kServerEmpty, 50, kTransit, 0),
                         rec(EventKind::kTransitEnd, 50, kTransit), rec(EventKind::kStart, 50, 1)},
                        jpre, jpost});
  expect_vec(ipa.row(1), x2 + y);
  expect_vec(ipa.row(kTransit), {0, 0, 0, 0});
}

// With estimated inflow, road 1 emptying while feeding an open burst moves
// x_1' into the burst: x_12' += x_1'.
TEST(IpaEngine, RoadOneEmptyingTransfersDerivative) {
  IpaEngine ipa(NetworkConfig{}, InflowModel::kEstimated);
  auto s0 = base_snapshot(0.0);
  s0.busy[0] = true;
  s0.x[0] = 60.0;
  s0.bursts.push_back(burst(0, 0.0, true));
  ipa.on_start(s0);
  // First G2R_1 gives x_1' = -h_1 e_1 + (alpha_1 terms cancel: busy both sides).
  auto pre = s0;
  pre.time = 40.0;
  auto post = pre;
  post.green = {false, true, true, false};
  post.bursts[0].open = false;
  ipa.on_step(EventStep{{rec(EventKind::kGreenToRed, 40, 0), rec(EventKind::kRedToGreen, 40, 2)}, pre, post});
  // R2G_1 at 60 starts burst 1.
  auto rpre = post;
  rpre.time = 60.0;
  auto rpost = rpre;
  rpost.green = {true, false, false, true};
  rpost.bursts.push_back(burst(1, 0.0, true));
  ipa.on_step(EventStep{{rec(EventKind::kGreenToRed, 60, 2), rec(EventKind::kRedToGreen, 60, 0),
                         rec(EventKind::kJoin, 60, kTransit, 1)},
                        rpre, rpost});
  const Vec4 x1 = ipa.row(0);
  const Vec4 y1 = ipa.burst(1).content;
  auto epre = rpost;
  epre.time = 70.0;
  auto epost = epre;
  epost.busy[0] = false;
  epost.x[0] = 0.0;
  ipa.on_step(EventStep{{rec(EventKind::kEnd, 70, 0)}, epre, epost});
  expect_vec(ipa.burst(1).content, y1 + x1);
  expect_vec(ipa.row(0), {0, 0, 0, 0});
}

TEST(IpaEngine, MergeIsUnsupported) {
  IpaEngine ipa(NetworkConfig{}, InflowModel::kImpulse);
  auto s0 = base_snapshot(0.0);
  ipa.on_start(s0);
  EXPECT_THROW(ipa.on_step(EventStep{{rec(EventKind::kMerge, 1, kTransit, 0, 1)}, s0, s0}), UnsupportedMode);
}

TEST(IpaEngine, UnknownBurstIsProtocolError) {
  IpaEngine ipa(NetworkConfig{}, InflowModel::kImpulse);
  auto s0 = base_snapshot(0.0);
  ipa.on_start(s0);
  EXPECT_THROW(ipa.on_step(EventStep{{rec(EventKind::kJoin, 1, kTransit, 7, 1, true)}, s0, s0}), ProtocolError);
}

// Along whole sample paths: x' = 0 at every start of a road-1/3/4 busy period,
// arrivals leave x' unchanged, and the x_2 + x_12 balance holds at each join.
TEST(IpaEngine, StructuralInvariantsOnSamplePaths) {
  for (double L : {0.0, 35.0, 100.0}) {
    NetworkConfig c;
    c.segment_length = L;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto r = run_sample(c, ThetaVector{}, CostConfig{}, seed);
      EXPECT_EQ(r.invariants.start_derivative, 0.0);
      EXPECT_EQ(r.invariants.exogenous_change, 0.0);
      EXPECT_LT(r.invariants.join_conservation, 1e-9);
    }
  }
}

// Same-seed central differences on a smooth light-traffic path.
TEST(IpaEngine, MatchesFiniteDifferences) {
  NetworkConfig c;
  c.arrival_rates = {0.2, 0.25, 0.15};
  c.horizon = 200;
  ThetaVector th;
  th.value = {27.3, 18.1, 21.7, 33.9};
  for (auto m : {MetricKind::kAverageQueue, MetricKind::kPower, MetricKind::kThreshold}) {
    CostConfig cost;
    cost.metric = m;
    cost.thresholds = {5, 5, 5, 5, 5};
    const auto g = finite_difference_check(c, th, cost, 3);
    for (int j = 0; j < kRoads; ++j) {
      ASSERT_TRUE(g.smooth[j]);
      EXPECT_NEAR(g.ipa[j], g.fd[j], std::max(1e-3, 0.05 * std::abs(g.fd[j]))) << to_string(m) << " j=" << j;
    }
  }
}
