#include <gtest/gtest.h>

#include <cmath>

#include "tlc/arrivals.hpp"

using namespace tlc;

TEST(Arrivals, ZeroRateIsEmpty) { EXPECT_TRUE(generate_arrivals(0.0, 1000.0, 1).empty()); }

TEST(Arrivals, SameSeedSameSequence) {
  EXPECT_EQ(generate_arrivals(0.41, 1000.0, 17), generate_arrivals(0.41, 1000.0, 17));
  EXPECT_NE(generate_arrivals(0.41, 1000.0, 17), generate_arrivals(0.41, 1000.0, 18));
}

TEST(Arrivals, StrictlyIncreasingInsideHorizon) {
  const auto a = generate_arrivals(2.0, 500.0, 3);
  ASSERT_FALSE(a.empty());
  EXPECT_GE(a.front(), 0.0);
  EXPECT_LT(a.back(), 500.0);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(a[i - 1], a[i]);
}

TEST(Arrivals, RejectsBadInput) {
  EXPECT_THROW(generate_arrivals(-0.1, 10.0, 1), ConfigError);
  EXPECT_THROW(generate_arrivals(0.1, 0.0, 1), ConfigError);
}

// Poisson count over [0, 1000) at 0.41/s: mean 410, variance 410.
TEST(Arrivals, CountMeanAndVarianceMatchPoisson) {
  const int n = 10000;
  double sum = 0.0, sq = 0.0;
  for (int s = 0; s < n; ++s) {
    const double c = static_cast<double>(generate_arrivals(0.41, 1000.0, s).size());
    sum += c;
    sq += c * c;
  }
  const double mean = sum / n;
  const double var = (sq - n * mean * mean) / (n - 1);
  EXPECT_LT(std::abs(mean - 410.0), 3.0 * std::sqrt(410.0 / n));
  // Sample variance of n Poisson counts has sd about lambda*sqrt(2/n).
  EXPECT_LT(std::abs(var - 410.0), 4.0 * 410.0 * std::sqrt(2.0 / n));
}

TEST(Arrivals, StreamsAreIndependentOfEachOther) {
  EXPECT_NE(generate_arrivals(0.5, 100.0, 9, 0), generate_arrivals(0.5, 100.0, 9, 2));
}
