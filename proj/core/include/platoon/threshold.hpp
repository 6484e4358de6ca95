#pragma once

#include <array>
#include <vector>

#include "platoon/dynamics.hpp"
#include "platoon/error.hpp"

namespace platoon {

// Evaluation context of the junction-level merge problem under Poisson
// arrivals with rate lambda.
struct PolicyParams {
  CostWeights w;
  FuelModel fm;
  double d1 = 1000.0;   // coordinating zone, m
  double d2 = 30000.0;  // cruising distance shared after a merge, m
  double v0 = 24.0;     // m/s
  double gamma = 0.9;
  double lambda = 108.0 / 3600.0;  // veh/s

  // Free-flow time through the coordinating zone; time reductions must stay below it.
  double zone_time() const { return d1 / v0; }
  // Action domain [u_min, u_max]: speeds between v0/2 and 10 v0.
  double u_min() const { return -zone_time(); }
  double u_max() const { return 0.9 * zone_time(); }
  void validate() const;
};

struct MergeReward {
  double value = 0.0;       // G(u), $
  double derivative = 0.0;  // dG/du, $/s
};

// G(u) = w1 u + w2 (alpha D1 v0^2 - alpha D1 v(u)^2 + eta phi D2): the reward
// of merging with time reduction u, i.e. minus the merge relative cost.
MergeReward merging_reward(double u, const PolicyParams& p);

// Relative cost -w1 u + w2 (dF1(u) - eta phi D2 [merged]).
double relative_cost(double u, bool merged, const PolicyParams& p);

// Integral of exp(-lambda (1-gamma) t) (G'(t) - lambda G(t)) over [c, theta].
double threshold_integral(const PolicyParams& p, double c, double theta, double rel_tol = 1e-13);

// Residuals of the three-equation system at (theta, c) with Z = G(theta)/(1-gamma).
std::array<double, 3> threshold_residuals(const PolicyParams& p, double theta, double c);

struct ThresholdSolution {
  double theta = 0.0;  // s
  double c = 0.0;      // s
  double z = 0.0;      // value constant, $
  std::array<double, 3> residuals{};
  int iterations = 0;
  // theta == c: no merge benefit (eta phi D2 == 0), every action collapses to argmax G.
  bool degenerate = false;

  double max_residual() const;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iterations = 100;
};

class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, ThresholdSolution best) : Error(what), best_(best) {}
  const ThresholdSolution& best() const { return best_; }

 private:
  ThresholdSolution best_;
};

class InfeasiblePolicyError : public Error {
 public:
  using Error::Error;
};

// Solves the renewal system for (theta, c, Z). Z is eliminated analytically;
// a bracketing reduction supplies the start point for a damped Newton
// iteration on (theta, c).
ThresholdSolution solve_threshold(const PolicyParams& p, const SolverOptions& opts = {});

// u = h when h <= theta (merge), c otherwise.
double evaluate_policy(double theta, double c, double h);

struct OracleOptions {
  double dh = 0.05;           // headway grid step, s
  double h_max = 0.0;         // 0 selects 20/lambda
  int action_stride = 1;      // non-merge actions every stride grid points
  double tol = 1e-11;         // sup-norm stopping rule
  int max_iterations = 10000;
};

struct OracleResult {
  double theta = 0.0;  // largest headway where merging is optimal
  double c = 0.0;      // best non-merge time reduction
  double z = 0.0;      // value of the non-merge region
  double action_step = 0.0;
  std::vector<double> h;
  std::vector<double> value;
  std::vector<char> merge;  // merge optimal at h[i]
  int iterations = 0;
};

// Brute-force value iteration of the per-arrival discounted MDP on a
// discretised headway grid starting at u_min. Throws NonThresholdPolicyError
// when the optimal merge set is not one interval covering [0, theta].
OracleResult value_iteration_oracle(const PolicyParams& p, const OracleOptions& opts = {});

}  // namespace platoon
