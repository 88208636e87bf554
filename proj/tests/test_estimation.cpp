#include <gtest/gtest.h>

#include <cmath>

#include "tlc/arrivals.hpp"
#include "tlc/estimation.hpp"
#include "tlc/sample.hpp"

using namespace tlc;

TEST(EstimateAlpha, NoArrivals) {
  RateEstimator e(100.0, 1.2);
  EXPECT_EQ(e.estimate_alpha(150.0), 0.0);
}

TEST(EstimateAlpha, DirectRatio) {
  RateEstimator e(100.0, 1.2);
  for (int i = 0; i < 41; ++i) e.record_arrival(100.0 + 2.0 * i + 1.0);
  EXPECT_DOUBLE_EQ(e.estimate_alpha(200.0), 0.41);
}

TEST(EstimateAlpha, WindowExcludesOldArrivals) {
  RateEstimator e(100.0, 1.2);
  e.record_arrival(10.0);
  e.record_arrival(150.0);
  EXPECT_DOUBLE_EQ(e.estimate_alpha(200.0), 1.0 / 100.0);
}

TEST(EstimateAlpha, WarmUpUsesElapsedTime) {
  RateEstimator e(100.0, 1.2);
  for (double t : {1.0, 2.0, 3.0}) e.record_arrival(t);
  EXPECT_DOUBLE_EQ(e.estimate_alpha(30.0), 3.0 / 30.0);
}

// Count in a 200 s window is Poisson(90): the mean of many independent
// windows sits within 3 standard errors of 0.45.
TEST(EstimateAlpha, ConsistentOnPoissonStream) {
  const int n = 2000;
  double sum = 0.0;
  for (int s = 0; s < n; ++s) {
    RateEstimator e(200.0, 1.0);
    for (double t : generate_arrivals(0.45, 400.0, 1000 + s)) e.record_arrival(t);
    sum += e.estimate_alpha(400.0);
  }
  const double se = std::sqrt(0.45 / 200.0 / n);
  EXPECT_LT(std::abs(sum / n - 0.45), 3.0 * se);
}

TEST(EstimateH, DeterministicHeadway) {
  RateEstimator e(100.0, 9.9);
  int departures = 0;
  for (int k = 1; k / 1.2 <= 60.0 + 1e-12; ++k) ++departures;
  for (int i = 0; i < departures; ++i) e.record_departure();
  e.add_exposure(60.0);
  EXPECT_DOUBLE_EQ(e.estimate_h(), 72.0 / 60.0);
}

TEST(EstimateH, FallbackWithoutExposure) {
  RateEstimator e(100.0, 1.3);
  EXPECT_DOUBLE_EQ(e.estimate_h(), 1.3);
}

TEST(EstimateH, OneDepartureOneSecond) {
  RateEstimator e(100.0, 1.3);
  e.record_departure();
  e.add_exposure(1.0);
  EXPECT_DOUBLE_EQ(e.estimate_h(), 1.0);
}

TEST(EstimateH, SimulatorReportsConfiguredDischargeRate) {
  SampleOptions o;
  o.keep_events = true;
  const auto r = run_sample(NetworkConfig{}, ThetaVector{}, CostConfig{}, 4, o);
  const Vec4 h = NetworkConfig{}.departure_rates;
  for (const auto& e : r.events)
    if (e.queue >= 0 && e.queue < kRoads) EXPECT_NEAR(e.h_obs, h[e.queue], 1e-12);
}
