#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "platoon/arrivals.hpp"

using namespace platoon;

namespace {
double sample_mean(double rate, std::uint64_t seed, int n) {
  PoissonSource src{rate, 0, 1, std::nullopt, 7};
  std::mt19937_64 rng(derive_stream_seed(seed, 7));
  double s = 0;
  for (int i = 0; i < n; ++i) s += sample_interarrival(src, rng);
  return s / n;
}
}  // namespace

TEST(Poisson, MeanWithinClt) {
  // sd of the mean is 16.667/sqrt(1e5) = 0.053 s; 2% is 0.33 s (> 6 sd)
  EXPECT_NEAR(sample_mean(0.06, 1, 100000), 1.0 / 0.06, 0.02 / 0.06);
}

TEST(Poisson, RateScaling) {
  const double m1 = sample_mean(0.03, 5, 100000);
  const double m2 = sample_mean(0.06, 5, 100000);
  EXPECT_NEAR(m2, m1 / 2, 0.02 * m1 / 2);
}

TEST(Poisson, Deterministic) {
  ArrivalStream a({0.1, 0, 1, 100, 3}, 42), b({0.1, 0, 1, 100, 3}, 42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(*a.next(), *b.next());
  EXPECT_FALSE(a.next().has_value());
  ArrivalStream c({0.1, 0, 1, std::nullopt, 4}, 42);
  EXPECT_NE(*c.next(), *ArrivalStream({0.1, 0, 1, std::nullopt, 3}, 42).next());
}

TEST(Poisson, ExponentialTailProbability) {
  // P(X > 1/rate) = e^-1
  PoissonSource src{0.5, 0, 1, std::nullopt, 0};
  std::mt19937_64 rng(derive_stream_seed(9, 0));
  int over = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) over += sample_interarrival(src, rng) > 2.0;
  EXPECT_NEAR(over / double(n), std::exp(-1.0), 0.005);
}

TEST(RateEstimator, ConstantHeadwayClosedForm) {
  HeadwayHistory h(0.9, 50);
  for (int i = 0; i < 50; ++i) h.push(10.0);
  const double expect = 1.0 / (10.0 * (1.0 - std::pow(0.9, 50)));
  EXPECT_NEAR(estimate_arrival_rate(h), expect, 1e-12);
  EXPECT_NEAR(estimate_arrival_rate(h), 0.100518, 1e-6);
}

TEST(RateEstimator, SingleTerm) {
  for (double psi : {0.1, 0.5, 0.95}) {
    HeadwayHistory h(psi, 1);
    h.push(3.0);
    h.push(7.0);
    EXPECT_NEAR(estimate_arrival_rate(h), 1.0 / ((1 - psi) * 7.0), 1e-12);
  }
}

TEST(RateEstimator, PartialWindowMatchesFullOnConstantStream) {
  HeadwayHistory h(0.9, 50);
  h.push(10.0);
  EXPECT_NEAR(estimate_arrival_rate(h), 1.0 / (10.0 * (1.0 - std::pow(0.9, 50))), 1e-12);
}

TEST(RateEstimator, Homogeneity) {
  HeadwayHistory a(0.8, 20), b(0.8, 20);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 30; ++i) {
    const double x = 0.5 + 10 * uniform01(rng);
    a.push(x);
    b.push(3 * x);
  }
  EXPECT_NEAR(estimate_arrival_rate(b), estimate_arrival_rate(a) / 3, 1e-12);
  EXPECT_EQ(a.size(), 20);
}

TEST(RateEstimator, DirectSumOracle) {
  HeadwayHistory h(0.7, 5);
  const double xs[] = {1, 2, 3, 4, 5, 6};
  for (double x : xs) h.push(x);
  // most recent first: 6,5,4,3,2
  double s = 0;
  for (int m = 0; m < 5; ++m) s += std::pow(0.7, m) * (6 - m);
  EXPECT_NEAR(estimate_arrival_rate(h), 1.0 / ((1 - 0.7) * s), 1e-12);
}

TEST(RateEstimator, Errors) {
  HeadwayHistory h(0.9, 5);
  EXPECT_THROW(estimate_arrival_rate(h), std::invalid_argument);
  EXPECT_THROW(h.push(0.0), std::invalid_argument);
  EXPECT_THROW(HeadwayHistory(1.0, 5), std::invalid_argument);
}
