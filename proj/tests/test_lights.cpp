#include <gtest/gtest.h>

#include "tlc/lights.hpp"

using namespace tlc;

TEST(Lights, InsideFirstGreen) {
  const auto g = light_phase(10.0, ThetaVector{});
  EXPECT_TRUE(g[0]);
  EXPECT_FALSE(g[2]);
}

TEST(Lights, InsideSecondPhase) {
  const auto g = light_phase(45.0, ThetaVector{});
  EXPECT_FALSE(g[0]);
  EXPECT_TRUE(g[2]);
}

TEST(Lights, PeriodRestartsFirstRoad) {
  EXPECT_TRUE(light_phase(60.0 + 1e-9, ThetaVector{})[0]);
  // Intersection 2: theta_2 = 20 then theta_4 = 40.
  EXPECT_TRUE(light_phase(60.0 + 1e-9, ThetaVector{})[1]);
  EXPECT_TRUE(light_phase(30.0, ThetaVector{})[3]);
}

TEST(Lights, ExactlyOneGreenPerIntersectionAndPeriodic) {
  ThetaVector th;
  th.value = {13.5, 27.25, 31.0, 11.75};
  for (double t = 0.0; t < 500.0; t += 0.37) {
    const auto g = light_phase(t, th);
    EXPECT_NE(g[0], g[2]);
    EXPECT_NE(g[1], g[3]);
    const auto g1 = light_phase(t + th[0] + th[2], th);
    EXPECT_EQ(g[0], g1[0]);
    const auto g2 = light_phase(t + th[1] + th[3], th);
    EXPECT_EQ(g[1], g2[1]);
  }
}
