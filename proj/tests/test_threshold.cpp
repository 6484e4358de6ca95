#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "platoon/threshold.hpp"

using namespace platoon;

namespace {

// Independent re-derivation of G for the oracle checks below.
double G(double u, const PolicyParams& p) {
  const double v = p.d1 / (p.d1 / p.v0 - u);
  return p.w.w1 * u + p.w.w2 * p.fm.alpha * p.d1 * (p.v0 * p.v0 - v * v) +
         p.w.w2 * p.fm.eta * p.fm.phi * p.d2;
}
double dG(double u, const PolicyParams& p) {
  const double h = 1e-5;
  return (G(u + h, p) - G(u - h, p)) / (2 * h);
}

// Residuals with a fixed 200k-panel composite Simpson rule.
std::array<double, 3> oracle_residuals(const PolicyParams& p, double th, double c) {
  const double a = p.lambda * (1 - p.gamma);
  const int n = 200000;
  const double hstep = (th - c) / n;
  auto f = [&](double t) { return std::exp(-a * t) * (dG(t, p) - p.lambda * G(t, p)); };
  double s = f(c) + f(th);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(c + i * hstep);
  const double integral = s * hstep / 3;
  const double z = G(th, p) / (1 - p.gamma);
  return {z - (std::exp(a * th) * integral + (z + G(0, p)) * std::exp(a * (th - c))),
          G(th, p) + p.gamma * z - z, dG(c, p) - p.lambda * G(c, p) + a * (z + G(0, p))};
}

PolicyParams params(double veh_per_hr, double d2) {
  PolicyParams p;
  p.lambda = veh_per_hr / 3600.0;
  p.d2 = d2;
  return p;
}

}  // namespace

TEST(MergingReward, KnownValues) {
  PolicyParams p;
  EXPECT_NEAR(merging_reward(0, p).value, 0.868 * 0.1 * 3.22e-4 * 30000, 1e-12);
  EXPECT_NEAR(merging_reward(0, p).value, 0.838488, 1e-12);
  PolicyParams q = p;
  q.w.w1 *= 3;
  q.fm.alpha *= 5;
  EXPECT_NEAR(merging_reward(0, q).value, merging_reward(0, p).value, 1e-15);
  const double expect = p.w.w1 - 2 * p.w.w2 * p.fm.alpha * std::pow(p.v0, 3);
  EXPECT_NEAR(merging_reward(0, p).derivative, expect, 1e-12);
  for (double u = -30; u < 30; u += 1.7) {
    EXPECT_NEAR(merging_reward(u, p).derivative, dG(u, p), 1e-7);
    EXPECT_NEAR(relative_cost(u, true, p), -merging_reward(u, p).value, 1e-12);
  }
  EXPECT_EQ(relative_cost(0, false, p), 0.0);
  EXPECT_NEAR(relative_cost(0, true, p), -0.838488, 1e-12);
  EXPECT_THROW(merging_reward(p.zone_time(), p), InfeasibleTimeReduction);
}

TEST(Solver, NominalMatchesIndependentResiduals) {
  auto p = params(108, 30000);
  auto s = solve_threshold(p);
  EXPECT_NEAR(s.theta, 21.809, 2e-3);
  EXPECT_NEAR(s.c, -39.802, 2e-3);
  EXPECT_LE(s.max_residual(), 1e-8);
  auto r = oracle_residuals(p, s.theta, s.c);
  for (double x : r) EXPECT_LE(std::abs(x), 1e-7);
  EXPECT_EQ(s.z * (1 - p.gamma) - merging_reward(s.theta, p).value, 0.0);
  EXPECT_FALSE(s.degenerate);
}

TEST(Solver, GridResidualsAndOrdering) {
  for (double lam : {108.0, 180.0, 216.0})
    for (double d2 : {2000.0, 10000.0, 30000.0}) {
      auto p = params(lam, d2);
      const auto t0 = std::chrono::steady_clock::now();
      auto s = solve_threshold(p);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      EXPECT_LT(secs, 1.0);
      EXPECT_LE(s.max_residual(), 1e-8) << lam << " " << d2;
      EXPECT_LT(s.c, s.theta);
      EXPECT_LT(s.theta, p.zone_time());
      EXPECT_NEAR(s.z, merging_reward(s.theta, p).value / (1 - p.gamma), 1e-9);
    }
}

TEST(Solver, LongerCruiseRaisesThreshold) {
  EXPECT_GT(solve_threshold(params(108, 30000)).theta, solve_threshold(params(108, 2000)).theta);
  EXPECT_GT(solve_threshold(params(108, 10000)).theta, solve_threshold(params(108, 2000)).theta);
}

TEST(Solver, ZeroCruiseIsDegenerate) {
  auto p = params(108, 0);
  auto s = solve_threshold(p);
  EXPECT_TRUE(s.degenerate);
  const double ustar = p.d1 / p.v0 - p.d1 * std::cbrt(2 * p.w.w2 * p.fm.alpha / p.w.w1);
  EXPECT_NEAR(s.theta, ustar, 1e-6);
  EXPECT_NEAR(s.c, ustar, 1e-6);
}

TEST(Solver, RejectsInvalidParams) {
  auto p = params(108, 30000);
  p.gamma = 1.0;
  EXPECT_THROW(solve_threshold(p), std::invalid_argument);
}

TEST(EvaluatePolicy, Boundary) {
  EXPECT_EQ(evaluate_policy(20, -5, 0), 0);
  EXPECT_EQ(evaluate_policy(20, -5, 20), 20);
  EXPECT_EQ(evaluate_policy(20, -5, 20.01), -5);
}

TEST(Oracle, AgreesWithSolverNominal) {
  auto p = params(108, 30000);
  auto s = solve_threshold(p);
  auto o = value_iteration_oracle(p);
  EXPECT_LE(std::abs(s.theta - o.theta), 0.1);
  EXPECT_LE(std::abs(s.c - o.c), o.action_step);
  // Merge set is one interval ending at theta.
  bool seen_merge = false, ended = false;
  for (size_t i = 0; i < o.h.size(); ++i) {
    if (o.merge[i]) {
      EXPECT_FALSE(ended);
      seen_merge = true;
    } else if (seen_merge) {
      ended = true;
    }
  }
  EXPECT_TRUE(seen_merge);
}

TEST(Oracle, RareArrivalsMergeMore) {
  auto slow = params(1e-4 * 3600, 30000);
  auto fast = params(0.05 * 3600, 30000);
  OracleOptions opt;
  opt.dh = 0.5;
  auto a = value_iteration_oracle(slow, opt);
  auto b = value_iteration_oracle(fast, opt);
  EXPECT_GT(a.theta, b.theta);
}

TEST(Oracle, MyopicNonMergeIsArgmaxG) {
  auto p = params(108, 30000);
  p.gamma = 1e-6;
  OracleOptions opt;
  opt.dh = 0.05;
  auto o = value_iteration_oracle(p, opt);
  double best = -1e300, arg = 0;
  for (double u = p.u_min(); u <= p.u_max(); u += o.action_step)
    if (G(u, p) > best) best = G(u, p), arg = u;
  EXPECT_LE(std::abs(o.c - arg), o.action_step + 1e-9);
}

TEST(Oracle, ValueMonotoneOnMergeRegion) {
  auto p = params(108, 30000);
  auto o = value_iteration_oracle(p);
  // G is decreasing for h above argmax G, so V is non-increasing on [0, theta].
  for (size_t i = 1; i < o.h.size(); ++i)
    if (o.h[i - 1] >= 0 && o.h[i] <= o.theta) EXPECT_LE(o.value[i], o.value[i - 1] + 1e-12);
}
