#include <gtest/gtest.h>

#include <cmath>

#include "tlc/transit.hpp"

using namespace tlc;

namespace {
TransitGeometry geo(double L, double eps = 0.5) { return TransitGeometry{L, 1.0, 1.0, eps}; }
}  // namespace

TEST(StartBurst, EmptyDownstreamQueue) {
  const auto b = start_burst(3.0, 0.0, geo(100));
  EXPECT_DOUBLE_EQ(b.gap, 100.0);
  EXPECT_DOUBLE_EQ(b.next_join_check(), 103.0);
  EXPECT_DOUBLE_EQ(b.sigma0(), 3.0);
}

TEST(StartBurst, GapSubtractsQueueLength) { EXPECT_DOUBLE_EQ(start_burst(0.0, 40.0, geo(100)).gap, 60.0); }

TEST(StartBurst, QueueSpanningSegmentJoinsImmediately) {
  const auto b = start_burst(7.0, 35.0, geo(35));
  EXPECT_DOUBLE_EQ(b.gap, 0.0);
  EXPECT_DOUBLE_EQ(b.next_join_check(), 7.0);
}

TEST(Tau, Examples) {
  EXPECT_DOUBLE_EQ(tau(60.0, 1.0), 60.0);
  EXPECT_DOUBLE_EQ(tau(0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(tau(30.0, 2.0), 15.0);
}

TEST(OnJk, UnchangedQueueJoins) {
  auto b = start_burst(0.0, 40.0, geo(100));
  b.content = 7.0;
  EXPECT_EQ(on_Jk(60.0, b, 40.0, geo(100)), JoinCheck::kJoin);
  EXPECT_EQ(b.k(), 1);
}

TEST(OnJk, DrainedQueueReschedules) {
  auto b = start_burst(0.0, 40.0, geo(100));
  EXPECT_EQ(on_Jk(60.0, b, 25.0, geo(100)), JoinCheck::kReschedule);
  EXPECT_DOUBLE_EQ(b.gap, 15.0);
  EXPECT_DOUBLE_EQ(b.estimate, 25.0);
  EXPECT_DOUBLE_EQ(b.next_join_check(), 75.0);
}

TEST(OnJk, JoinsWhileQueueEmpty) {
  auto b = start_burst(0.0, 0.4, geo(100));
  EXPECT_EQ(on_Jk(99.6, b, 0.0, geo(100)), JoinCheck::kJoin);
}

TEST(OnJk, GrowingQueueIsAModelViolation) {
  auto b = start_burst(0.0, 10.0, geo(100));
  EXPECT_THROW(on_Jk(90.0, b, 12.0, geo(100)), ModelViolation);
}

// Vehicles leave road 1 at headway 1/h; the burst holds those that left.
TEST(AccumulateTransit, FiveSecondsOfDischarge) {
  const double h = 1.2;
  int departures = 0;
  for (int k = 1; k / h <= 5.0 + 1e-12; ++k) ++departures;
  auto b = start_burst(0.0, 0.0, geo(100));
  accumulate_transit(b, transit_inflow_rate(true, true, 0.41, h), 5.0);
  EXPECT_NEAR(b.content, departures, 1e-12);
}

TEST(AccumulateTransit, RedOrIdleLeavesContent) {
  EXPECT_EQ(transit_inflow_rate(false, true, 0.41, 1.2), 0.0);
  EXPECT_EQ(transit_inflow_rate(true, false, 0.0, 1.2), 0.0);
  EXPECT_EQ(transit_inflow_rate(true, false, 0.41, 1.2), 0.41);
}

TEST(Threshold, Crossings) {
  EXPECT_EQ(detect_threshold_events(24.5, 25.5, 25.0), ThresholdCrossing::kUp);
  EXPECT_EQ(detect_threshold_events(25.0, 24.0, 25.0), ThresholdCrossing::kDown);
  EXPECT_EQ(detect_threshold_events(10.0, 10.0, 25.0), ThresholdCrossing::kNone);
}

TEST(TransitLine, OneBurstBehavesLikeSingleBurst) {
  TransitLine line(geo(100));
  auto& b = line.start(0.0, 40.0);
  EXPECT_DOUBLE_EQ(b.gap, start_burst(0.0, 40.0, geo(100)).gap);
  b.content = 3.0;
  EXPECT_DOUBLE_EQ(line.complete_join(60.0, b.id, 43.0), 3.0);
  EXPECT_TRUE(line.empty());
}

// Leader with 5 vehicles joins; the trailer's gap shrinks by 5 vehicle lengths
// and its estimate becomes the post-join queue.
TEST(TransitLine, LeaderJoinShiftsTrailer) {
  TransitLine line(geo(100));
  auto& lead = line.start(0.0, 0.0);
  lead.content = 5.0;
  lead.open = false;
  auto& trail = line.start(20.0, 0.0);
  trail.gap = 30.0;
  trail.estimate = 12.0;
  const int lead_id = line.bursts().front().id;
  const double x2 = 12.0;
  line.complete_join(21.0, lead_id, x2 + 5.0);
  ASSERT_EQ(line.bursts().size(), 1u);
  EXPECT_DOUBLE_EQ(line.bursts().front().gap, 25.0);
  EXPECT_DOUBLE_EQ(line.bursts().front().estimate, x2 + 5.0);
  EXPECT_FALSE(line.bursts().front().gap_clamped);
}

// Leader crawls at 0.2 with one vehicle (tail at 0.2 t - 1); trailer leaves
// at t = 10 with speed 1, so its head meets the tail at t = 11.25.
TEST(TransitLine, SlowLeaderIsCaughtAndMergeConserves) {
  TransitLine line(geo(100));
  auto& lead = line.start(0.0, 0.0, 0.2);
  lead.content = 1.0;
  lead.open = false;
  auto& trail = line.start(10.0, 0.0, 1.0);
  trail.content = 6.0;
  trail.open = false;
  const auto m = line.next_merge(10.0);
  ASSERT_TRUE(m.has_value());
  EXPECT_NEAR(m->time, 11.25, 1e-12);
  const double before = line.total();
  line.merge(m->leader, m->trailer);
  EXPECT_EQ(line.bursts().size(), 1u);
  EXPECT_DOUBLE_EQ(line.total(), before);
  EXPECT_DOUBLE_EQ(line.bursts().front().content, 7.0);
}

TEST(TransitLine, EqualSpeedsNeverMerge) {
  TransitLine line(geo(100));
  line.start(0.0, 0.0).open = false;
  line.start(5.0, 0.0);
  EXPECT_FALSE(line.next_merge(5.0).has_value());
}
