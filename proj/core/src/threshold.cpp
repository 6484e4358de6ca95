#include "platoon/threshold.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

namespace platoon {

void PolicyParams::validate() const {
  w.validate();
  fm.validate();
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("gamma must lie in (0,1)");
  if (!(lambda > 0)) throw std::invalid_argument("arrival rate must be positive");
  if (!(d1 > 0) || !(d2 >= 0) || !(v0 > 0))
    throw std::invalid_argument("zone lengths and speed must be positive");
}

MergeReward merging_reward(double u, const PolicyParams& p) {
  const double remaining = p.zone_time() - u;
  if (!(remaining > 0))
    throw InfeasibleTimeReduction("merge time reduction " + std::to_string(u) +
                                  " s is not below " + std::to_string(p.zone_time()) + " s");
  const double v = p.d1 / remaining;
  const double alpha_d1 = p.fm.alpha * p.d1;
  MergeReward r;
  r.value = p.w.w1 * u +
            p.w.w2 * (alpha_d1 * p.v0 * p.v0 - alpha_d1 * v * v + p.fm.eta * p.fm.phi * p.d2);
  // d/du [D1/(D1/v0-u)]^2 = 2 D1^2 / (D1/v0-u)^3
  r.derivative = p.w.w1 - p.w.w2 * alpha_d1 * 2.0 * p.d1 * p.d1 / (remaining * remaining * remaining);
  return r;
}

double relative_cost(double u, bool merged, const PolicyParams& p) {
  const double df1 = delta_f1(u, p.d1, p.v0, p.fm.alpha);
  const double platoon = merged ? p.fm.eta * p.fm.phi * p.d2 : 0.0;
  return -p.w.w1 * u + p.w.w2 * (df1 - platoon);
}

double threshold_integral(const PolicyParams& p, double c, double theta, double rel_tol) {
  const double a = p.lambda * (1.0 - p.gamma);
  auto integrand = [&](double t) {
    const MergeReward g = merging_reward(t, p);
    return std::exp(-a * t) * (g.derivative - p.lambda * g.value);
  };
  return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(integrand, c, theta, 12,
                                                                        rel_tol);
}

std::array<double, 3> threshold_residuals(const PolicyParams& p, double theta, double c) {
  const double a = p.lambda * (1.0 - p.gamma);
  const double g0 = merging_reward(0.0, p).value;
  const MergeReward gt = merging_reward(theta, p);
  const MergeReward gc = merging_reward(c, p);
  const double z = gt.value / (1.0 - p.gamma);
  const double integral = threshold_integral(p, c, theta);
  std::array<double, 3> r;
  r[0] = z - (std::exp(a * theta) * integral + (z + g0) * std::exp(a * (theta - c)));
  r[1] = gt.value + p.gamma * z - z;
  r[2] = gc.derivative - p.lambda * gc.value + a * (z + g0);
  return r;
}

double ThresholdSolution::max_residual() const {
  return std::max({std::abs(residuals[0]), std::abs(residuals[1]), std::abs(residuals[2])});
}

namespace {

using boost::math::tools::eps_tolerance;
using boost::math::tools::toms748_solve;

// Root of h on [lo, hi] with h(lo) and h(hi) of opposite sign.
template <class F>
double bracket_root(F&& h, double lo, double hi, double h_lo, double h_hi) {
  std::uintmax_t max_iter = 200;
  const auto [a, b] = toms748_solve(h, lo, hi, h_lo, h_hi, eps_tolerance<double>(52), max_iter);
  return 0.5 * (a + b);
}

// Optimal non-merge action for a given threshold: the largest local maximum
// of the continuation objective below theta, i.e. the largest +/- sign change
// of the first-order condition G'(c) - lambda G(c) + a (Z + G(0)).
std::optional<double> nonmerge_action(const PolicyParams& p, double theta) {
  const double a = p.lambda * (1.0 - p.gamma);
  const double g0 = merging_reward(0.0, p).value;
  const double z = merging_reward(theta, p).value / (1.0 - p.gamma);
  auto foc = [&](double c) {
    const MergeReward g = merging_reward(c, p);
    return g.derivative - p.lambda * g.value + a * (z + g0);
  };
  const double step = p.zone_time() / 50.0;
  const double floor = theta - 40.0 * p.zone_time();
  double hi = theta;
  double f_hi = foc(hi);
  for (double lo = theta - step; lo >= floor; lo -= step) {
    const double f_lo = foc(lo);
    if (f_lo > 0 && f_hi <= 0) {
      if (f_hi == 0) return hi;
      return bracket_root(foc, lo, hi, f_lo, f_hi);
    }
    hi = lo;
    f_hi = f_lo;
  }
  return std::nullopt;
}

ThresholdSolution make_solution(const PolicyParams& p, double theta, double c, int iterations) {
  ThresholdSolution s;
  s.theta = theta;
  s.c = c;
  s.z = merging_reward(theta, p).value / (1.0 - p.gamma);
  s.residuals = threshold_residuals(p, theta, c);
  s.iterations = iterations;
  s.degenerate = std::abs(theta - c) < 1e-7;
  return s;
}

// Damped Newton on (theta, c) for residuals 1 and 3 with a central-difference
// Jacobian; a step is halved until the residual norm decreases.
ThresholdSolution newton_polish(const PolicyParams& p, ThresholdSolution s,
                                const SolverOptions& opts) {
  auto residual2 = [&](double theta, double c) {
    const auto r = threshold_residuals(p, theta, c);
    return std::array<double, 2>{r[0], r[2]};
  };
  auto norm2 = [](const std::array<double, 2>& r) { return std::max(std::abs(r[0]), std::abs(r[1])); };
  const double limit = p.zone_time();
  double theta = s.theta, c = s.c;
  auto r = residual2(theta, c);
  for (int it = 0; it < opts.max_iterations && norm2(r) > 1e-3 * opts.tol; ++it) {
    ++s.iterations;
    const double ht = 1e-6 * std::max(1.0, std::abs(theta));
    const double hc = 1e-6 * std::max(1.0, std::abs(c));
    const auto rtp = residual2(theta + ht, c), rtm = residual2(theta - ht, c);
    const auto rcp = residual2(theta, c + hc), rcm = residual2(theta, c - hc);
    const double j00 = (rtp[0] - rtm[0]) / (2 * ht), j01 = (rcp[0] - rcm[0]) / (2 * hc);
    const double j10 = (rtp[1] - rtm[1]) / (2 * ht), j11 = (rcp[1] - rcm[1]) / (2 * hc);
    const double det = j00 * j11 - j01 * j10;
    if (!std::isfinite(det) || det == 0.0) break;
    const double dtheta = -(j11 * r[0] - j01 * r[1]) / det;
    const double dc = -(-j10 * r[0] + j00 * r[1]) / det;
    double scale = 1.0;
    bool improved = false;
    for (int k = 0; k < 30; ++k, scale *= 0.5) {
      const double nt = theta + scale * dtheta, nc = c + scale * dc;
      if (!(nt < limit) || !(nc < limit)) continue;
      const auto nr = residual2(nt, nc);
      if (norm2(nr) < norm2(r)) {
        theta = nt;
        c = nc;
        r = nr;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return make_solution(p, theta, c, s.iterations);
}

}  // namespace

ThresholdSolution solve_threshold(const PolicyParams& p, const SolverOptions& opts) {
  p.validate();
  const double limit = p.zone_time();
  int iterations = 0;

  // Residual 1 as a function of theta alone, with c from the first-order condition.
  auto reduced = [&](double theta) -> std::optional<double> {
    ++iterations;
    const auto c = nonmerge_action(p, theta);
    if (!c || !(*c < theta)) return std::nullopt;
    return threshold_residuals(p, theta, *c)[0];
  };

  const int n_scan = 32;
  const double lo = -0.99 * limit, hi = 0.999 * limit;
  std::optional<double> prev_r;
  double prev_theta = lo;
  std::optional<ThresholdSolution> found;
  ThresholdSolution best;
  best.residuals.fill(std::numeric_limits<double>::infinity());
  for (int i = 0; i <= n_scan && !found; ++i) {
    const double theta = lo + (hi - lo) * i / n_scan;
    const auto r = reduced(theta);
    if (r && prev_r && ((*r <= 0) != (*prev_r <= 0))) {
      auto f = [&](double t) {
        const auto v = reduced(t);
        return v ? *v : std::numeric_limits<double>::quiet_NaN();
      };
      double root;
      try {
        root = bracket_root(f, prev_theta, theta, *prev_r, *r);
      } catch (const std::exception&) {
        root = std::abs(*prev_r) < std::abs(*r) ? prev_theta : theta;
      }
      const auto c = nonmerge_action(p, root);
      if (c) found = make_solution(p, root, *c, iterations);
    } else if (r) {
      const auto c = nonmerge_action(p, theta);
      if (c && std::abs(*r) < best.max_residual()) best = make_solution(p, theta, *c, iterations);
    }
    prev_r = r;
    prev_theta = theta;
  }

  if (!found) {
    // Without a platoon benefit the system collapses to theta = c = argmax G.
    const double g0 = merging_reward(0.0, p).value;
    if (std::abs(g0) < 1e-12) {
      const double ratio = 2.0 * p.w.w2 * p.fm.alpha / p.w.w1;
      const double u_star = limit - p.d1 * std::cbrt(ratio);
      found = make_solution(p, u_star, u_star, iterations);
    }
  }
  if (!found) {
    best.iterations = iterations;
    throw SolverFailure("threshold system: no root bracketed on the feasible range", best);
  }

  ThresholdSolution sol = newton_polish(p, *found, opts);
  if (sol.max_residual() > opts.tol) {
    if (found->max_residual() < sol.max_residual()) sol = *found;
    if (sol.max_residual() > opts.tol)
      throw SolverFailure("threshold system: residual above tolerance", sol);
  }
  if (!(sol.theta < limit))
    throw InfeasiblePolicyError("threshold " + std::to_string(sol.theta) +
                                " s is not kinematically feasible");
  return sol;
}

double evaluate_policy(double theta, double c, double h) { return h <= theta ? h : c; }

OracleResult value_iteration_oracle(const PolicyParams& p, const OracleOptions& opts) {
  p.validate();
  if (!(opts.dh > 0)) throw std::invalid_argument("oracle grid step must be positive");
  if (opts.action_stride < 1) throw std::invalid_argument("action stride must be >= 1");
  const double u_min = p.u_min(), u_max = p.u_max();
  const double h_max = opts.h_max > 0 ? opts.h_max : 20.0 / p.lambda;
  const int n = static_cast<int>(std::ceil((h_max - u_min) / opts.dh));
  const double g0 = merging_reward(0.0, p).value;

  OracleResult out;
  out.action_step = opts.dh * opts.action_stride;
  out.h.resize(static_cast<size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) out.h[static_cast<size_t>(i)] = u_min + opts.dh * i;

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> merge_reward(out.h.size(), kNegInf);
  std::vector<double> stay_reward(out.h.size(), kNegInf);
  std::vector<int> actions;
  for (size_t i = 0; i < out.h.size(); ++i) {
    if (out.h[i] > u_max + 1e-12) continue;
    merge_reward[i] = merging_reward(out.h[i], p).value;
    stay_reward[i] = merge_reward[i] - g0;  // -relative_cost(u, false)
    if (i % static_cast<size_t>(opts.action_stride) == 0) actions.push_back(static_cast<int>(i));
  }

  // E[V(x + s)] for x ~ Exp(lambda), V linear between grid points, exponential
  // truncated at h_max and renormalised.
  const double q = std::exp(-p.lambda * opts.dh);
  const double w_const = 1.0 - q;
  const double w_slope = (1.0 - q * (1.0 + p.lambda * opts.dh)) / (p.lambda * opts.dh);
  std::vector<double> tail_mass(out.h.size());
  for (size_t i = 0; i < out.h.size(); ++i) tail_mass[i] = -std::expm1(-p.lambda * (out.h.back() - out.h[i]));

  std::vector<double> value(out.h.size(), 0.0), next(out.h.size()), expect(out.h.size());
  std::vector<double> partial(out.h.size());
  int best_action = actions.front();
  double stay_value = 0.0;
  auto sweep = [&]() {
    partial.back() = 0.0;
    for (size_t i = out.h.size() - 1; i-- > 0;) {
      partial[i] = value[i] * w_const + (value[i + 1] - value[i]) * w_slope + q * partial[i + 1];
    }
    for (size_t i = 0; i + 1 < out.h.size(); ++i) expect[i] = partial[i] / tail_mass[i];
    expect.back() = value.back();
    best_action = actions.front();
    stay_value = kNegInf;
    for (int a : actions) {
      const double v = stay_reward[static_cast<size_t>(a)] + p.gamma * expect[static_cast<size_t>(a)];
      if (v > stay_value) {
        stay_value = v;
        best_action = a;
      }
    }
  };

  for (out.iterations = 0; out.iterations < opts.max_iterations; ++out.iterations) {
    sweep();
    double delta = 0.0;
    for (size_t i = 0; i < out.h.size(); ++i) {
      next[i] = std::max(merge_reward[i] + p.gamma * expect[i], stay_value);
      delta = std::max(delta, std::abs(next[i] - value[i]));
    }
    value.swap(next);
    if (delta < opts.tol) break;
  }
  sweep();

  out.merge.assign(out.h.size(), 0);
  int first = -1, last = -1;
  for (size_t i = 0; i < out.h.size(); ++i) {
    if (merge_reward[i] + p.gamma * expect[i] >= stay_value) {
      out.merge[i] = 1;
      if (first < 0) first = static_cast<int>(i);
      last = static_cast<int>(i);
    }
  }
  out.value = value;
  out.z = stay_value;
  out.c = out.h[static_cast<size_t>(best_action)];
  if (first < 0) throw NonThresholdPolicyError("merging is never optimal on the grid");
  for (int i = first; i <= last; ++i)
    if (!out.merge[static_cast<size_t>(i)])
      throw NonThresholdPolicyError("optimal merge set is not an interval");
  out.theta = out.h[static_cast<size_t>(last)];
  if (out.theta >= 0 && out.h[static_cast<size_t>(first)] > opts.dh)
    throw NonThresholdPolicyError("optimal merge set does not start at zero headway");
  return out;
}

}  // namespace platoon
