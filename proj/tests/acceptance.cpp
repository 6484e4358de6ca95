// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed below.
// Exit status is 0 when every failure is on the known-red list.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "platoon/arrivals.hpp"
#include "platoon/config.hpp"
#include "platoon/dynamics.hpp"
#include "platoon/experiments.hpp"
#include "platoon/metrics.hpp"
#include "platoon/routing.hpp"
#include "platoon/sim.hpp"
#include "platoon/threshold.hpp"
#include "platoon/value_approx.hpp"

using namespace platoon;

namespace {

// ---- pinned tolerances -----------------------------------------------------
constexpr double kResidualTol = 1e-8;
constexpr double kZTol = 1e-9;
constexpr double kSolveSeconds = 1.0;
constexpr double kOracleThetaTol = 0.1;
constexpr double kOracleSeconds = 60.0;
constexpr double kRoutingTol = 1e-9;
constexpr double kCoefRelTol = 1e-6;
constexpr double kClosedLoopErr = 0.05;
constexpr double kFuelExample = 0.0146182;
constexpr double kFuelTol = 1e-7;
constexpr double kIdentityTol = 1e-9;
constexpr double kEstimatorTol = 1e-12;
constexpr double kMinImprovement = 0.10;
constexpr double kOrderingSeconds = 300.0;
constexpr int kAllowedInversions = 1;
constexpr double kMinSpearman = 0.9;
constexpr double kRecoverySeconds = 500.0;
constexpr double kSpikeBelow = 1.0;      // s
constexpr double kMinSpikeFraction = 0.1;
constexpr double kSpikeOverExponential = 3.0;
constexpr double kMaxTailKs = 0.1;
constexpr double kAccountingTol = 1e-9;
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

// Criterion 5 quotes fuel_rate(24) = 0.0146182, but 3.51e-7 v^3 + 4.07e-4 v
// evaluates to 0.014620224 at 24 m/s.
const std::set<int> kKnownRed{5};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PolicyParams nominal(double lambda_hr, double d2) {
  PolicyParams p;  // Table 1 values; D1 = 1 km
  p.lambda = lambda_hr / 3600.0;
  p.d2 = d2;
  return p;
}

// ---- 1 ---------------------------------------------------------------------
Outcome c1_solver_grid() {
  double worst_res = 0, worst_z = 0, worst_t = 0;
  bool ordered = true;
  for (double lam : {108.0, 180.0, 216.0})
    for (double d2 : {2000.0, 10000.0, 30000.0}) {
      const PolicyParams p = nominal(lam, d2);
      const auto t0 = std::chrono::steady_clock::now();
      ThresholdSolution s;
      try {
        s = solve_threshold(p);
      } catch (const std::exception& e) {
        return {false, fmt("lambda %.0f D2 %.0f: %s", lam, d2, e.what())};
      }
      worst_t = std::max(worst_t, seconds_since(t0));
      const auto r = threshold_residuals(p, s.theta, s.c);
      for (double x : r) worst_res = std::max(worst_res, std::abs(x));
      worst_z = std::max(worst_z, std::abs(s.z - merging_reward(s.theta, p).value / (1 - p.gamma)));
      ordered = ordered && s.c < s.theta && s.theta < p.d1 / p.v0;
    }
  return {worst_res <= kResidualTol && worst_z <= kZTol && ordered && worst_t < kSolveSeconds,
          fmt("max residual %.2e, max |Z - G(theta)/(1-gamma)| %.2e, c < theta < D1/v0: %s, "
              "slowest solve %.3f s",
              worst_res, worst_z, ordered ? "yes" : "no", worst_t)};
}

// ---- 2 ---------------------------------------------------------------------
Outcome c2_oracle() {
  const PolicyParams p = nominal(108, 30000);
  const ThresholdSolution s = solve_threshold(p);
  const auto t0 = std::chrono::steady_clock::now();
  OracleResult o;
  try {
    o = value_iteration_oracle(p, {});
  } catch (const std::exception& e) {
    return {false, fmt("oracle: %s", e.what())};
  }
  const double t = seconds_since(t0);
  const double dt = std::abs(s.theta - o.theta), dc = std::abs(s.c - o.c);
  return {dt <= kOracleThetaTol && dc <= o.action_step && t < kOracleSeconds,
          fmt("threshold-shaped; theta %.4f vs %.4f (|d| %.4f), c %.4f vs %.4f (|d| %.4f, step %.4f), "
              "%.1f s",
              s.theta, o.theta, dt, s.c, o.c, dc, o.action_step, t)};
}

// ---- 3 ---------------------------------------------------------------------
Outcome c3_routing() {
  const RoadNetwork net = build_nguyen_dupuis(2000, 500, 1);
  // Deterministic edge times that differ from free flow; tables start at free flow.
  std::vector<double> w(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) w[e] = 60 + 13.0 * ((e * 7) % 5);
  TravelTimeTable t = init_tables(net, 24.0, 1.0);
  double worst = 0;
  int pairs = 0;
  for (int d = 0; d < static_cast<int>(net.destinations().size()); ++d) {
    const VertexId dest = net.destinations()[d];
    const auto dist = distances_to(net, dest, w);
    std::vector<VertexId> order(net.num_vertices());
    for (VertexId v = 0; v < net.num_vertices(); ++v) order[v] = v;
    std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) { return dist[a] < dist[b]; });
    for (VertexId v : order)
      for (EdgeId e : net.vertex(v).in_edges) t.update(e, d, w[e], t.downstream_min(net, v, d, 0));
    for (VertexId o = 0; o < net.num_vertices(); ++o) {
      if (o == dest || !std::isfinite(dist[o])) continue;
      const Path p = predict_path(net, t, o, dest, 0);
      double sum = 0;
      for (EdgeId e : p.edges) sum += w[e];
      worst = std::max(worst, std::abs(sum - dist[o]));
      ++pairs;
    }
  }
  return {worst <= kRoutingTol, fmt("%d origin-destination pairs, max |greedy - Dijkstra| %.2e s", pairs, worst)};
}

// ---- 4 ---------------------------------------------------------------------
Outcome c4_regression() {
  const double want[] = {2.0, -1.5, 0.25, 0.05};
  auto cubic = [&](double h) { return want[0] + h * (want[1] + h * (want[2] + h * want[3])); };
  std::vector<CostSample> s;
  for (int i = 0; i < 10; ++i) s.push_back({-2.0 + 2.5 * i, cubic(-2.0 + 2.5 * i)});
  const auto raw = fit_polynomial(s, 3).raw_coefficients();
  double worst = 0;
  for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(raw[k] - want[k]) / std::abs(want[k]));

  auto merge_cost = [](double h) { return 0.5 + 0.002 * h * h * h - 0.01 * h; };
  const double nomerge = 6.0;
  PolyCostModel m(3, 30, 20);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uh(0, 25);
  int errors = 0;
  for (int k = 0; k < 2000; ++k) {
    const double h = uh(rng);
    const MergeAction a = m.decide(h);
    const MergeAction truth = merge_cost(h) <= nomerge ? MergeAction::kMerge : MergeAction::kNoMerge;
    if (k >= 1500 && a != truth) ++errors;
    m.record_outcome(h, a, a == MergeAction::kMerge ? merge_cost(h) : nomerge);
  }
  const double rate = errors / 500.0;
  return {worst <= kCoefRelTol && rate < kClosedLoopErr,
          fmt("max relative coefficient error %.2e; closed-loop decision error %.1f%% over the last 500",
              worst, 100 * rate)};
}

// ---- 5 ---------------------------------------------------------------------
Outcome c5_formulas() {
  const double f = fuel_rate(24.0);
  const bool fuel_ok = std::abs(f - kFuelExample) <= kFuelTol;
  const GreenshieldModel g = GreenshieldModel::from_critical_density(24.0, 0.035);
  const bool eq_ok = equilibrium_speed(g.k_c(), g) == g.v0 / 2;
  double worst_inv = 0;
  for (double u : {-20.0, -5.0, 0.0, 3.0, 15.0, 30.0}) {
    const double v = reference_speed(u, 1000, 24);
    worst_inv = std::max(worst_inv, std::abs((1000 / 24.0 - 1000 / v) - u));
  }
  HeadwayHistory h(0.9, 50);
  for (int i = 0; i < 50; ++i) h.push(10.0);
  const double est_err = std::abs(estimate_arrival_rate(h) - 1.0 / (10.0 * (1.0 - std::pow(0.9, 50))));
  const bool ok = fuel_ok && eq_ok && worst_inv <= kIdentityTol && est_err <= kEstimatorTol;
  return {ok, fmt("fuel_rate(24) = %.9f vs %.7f +/- 1e-7 (off by %.2e); v_e(k_c) == v0/2: %s; "
                  "reference-speed identity %.1e; estimator closed form %.1e",
                  f, kFuelExample, f - kFuelExample, eq_ok ? "yes" : "no", worst_inv, est_err)};
}

// ---- 6 ---------------------------------------------------------------------
Outcome c6_ordering() {
  ScenarioConfig c = default_nguyen_dupuis();
  c.sweep.variable = "critical_density";
  c.sweep.values = {35};
  c.sweep.policies = {PolicyKind::kBaseline, PolicyKind::kPolicyA, PolicyKind::kThresholdNetwork};
  c.sweep.seeds = kSeeds;
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult r = run_sweep(c, static_cast<int>(std::thread::hardware_concurrency()));
  const double t = seconds_since(t0);
  const double b = median_cost(r, 35, PolicyKind::kBaseline);
  const double a = median_cost(r, 35, PolicyKind::kPolicyA);
  const double n = median_cost(r, 35, PolicyKind::kThresholdNetwork);
  const double gain = 1 - n / a;
  return {n < a && a < b && gain >= kMinImprovement && t < kOrderingSeconds,
          fmt("median cost $: threshold-network %.4f < policy-a %.4f < baseline %.4f; "
              "improvement over policy-a %.1f%%; %.1f s",
              n, a, b, 100 * gain, t)};
}

// ---- 7 ---------------------------------------------------------------------
Outcome c7_congestion_trend() {
  ScenarioConfig c = default_nguyen_dupuis();
  c.sweep.variable = "critical_density";
  c.sweep.values = {30, 40, 50, 60, 70};
  c.sweep.policies = {PolicyKind::kBaseline, PolicyKind::kThresholdNetwork};
  c.sweep.seeds = kSeeds;
  const SweepResult r = run_sweep(c, static_cast<int>(std::thread::hardware_concurrency()));
  std::vector<double> ratio;
  std::string list;
  for (double v : c.sweep.values) {
    ratio.push_back(median_cost(r, v, PolicyKind::kThresholdNetwork) / median_cost(r, v, PolicyKind::kBaseline));
    list += fmt("%s%.0f:%.3f", list.empty() ? "" : " ", v, ratio.back());
  }
  int inversions = 0;
  for (size_t i = 1; i < ratio.size(); ++i) inversions += ratio[i] < ratio[i - 1];
  const bool finite = std::all_of(ratio.begin(), ratio.end(), [](double x) { return std::isfinite(x); });
  return {finite && inversions <= kAllowedInversions,
          fmt("threshold-network/baseline by k_c: %s; %d inversion(s)", list.c_str(), inversions)};
}

// ---- 8 ---------------------------------------------------------------------
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<size_t> idx(v.size());
    for (size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (size_t i = 0; i < idx.size();) {
      size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * (i + j);
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) mx += rx[i] / n, my += ry[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Outcome c8_demand_trend() {
  ScenarioConfig c = default_nguyen_dupuis();
  c.sweep.variable = "od_rate";
  c.sweep.values = {100, 200, 300, 400};
  c.sweep.policies = {PolicyKind::kBaseline};
  c.sweep.seeds = kSeeds;
  const SweepResult r = run_sweep(c, static_cast<int>(std::thread::hardware_concurrency()));
  std::vector<double> med;
  std::string list;
  for (double v : c.sweep.values) {
    med.push_back(median_cost(r, v, PolicyKind::kBaseline));
    list += fmt("%s%.0f:%.3f", list.empty() ? "" : " ", v, med.back());
  }
  const double rho = spearman(c.sweep.values, med);
  return {rho > kMinSpearman, fmt("baseline median cost by O-D rate: %s; Spearman rho %.3f", list.c_str(), rho)};
}

// ---- 9 ---------------------------------------------------------------------
Outcome c9_resilience() {
  ScenarioConfig c = default_nguyen_dupuis();
  c.sim.max_time_s = 4000;
  const ResilienceResult r = run_resilience(c, 18, 1000, 2000);
  std::string inc;
  for (EdgeId e : r.increased) inc += fmt("%s%d", inc.empty() ? "" : ",", label_of(e));
  const double back = r.first_cav_entry_after - r.t_on;
  const bool recovered = std::isfinite(back) && back <= kRecoverySeconds;
  return {r.entries_during == 0 && !r.increased.empty() && recovered,
          fmt("entries onto edge 18 while closed: %d; edges with higher flow in the window: %s; "
              "first CAV back on edge 18 %.1f s after reopening",
              r.entries_during, inc.empty() ? "none" : inc.c_str(), back)};
}

// ---- 10 --------------------------------------------------------------------
Outcome c10_arrival_mixing() {
  const ScenarioConfig c = default_cascade();
  const MetricsReport r = run_simulation(c);
  const VertexId j2 = index_of(CascadeLayout{c.network.cascade_junctions}.junction(2));
  std::vector<double> h, theta;
  bool first = true;
  for (const ArrivalRecord& a : r.arrivals)
    if (a.vertex == j2) {
      if (!first) h.push_back(a.headway);  // the first record is time since t = 0
      first = false;
    }
  for (const PolicyRecord& p : r.policy)
    if (p.vertex == j2 && std::isfinite(p.theta)) theta.push_back(p.theta);
  if (h.size() < 100 || theta.empty()) return {false, "too few arrivals at J2"};
  const double th = median(theta);
  double mean = 0;
  for (double x : h) mean += x / h.size();
  const double spike = std::count_if(h.begin(), h.end(), [](double x) { return x < kSpikeBelow; }) /
                       static_cast<double>(h.size());
  const double expo = 1 - std::exp(-kSpikeBelow / mean);
  std::vector<double> tail;
  for (double x : h)
    if (x > th) tail.push_back(x - th);
  std::sort(tail.begin(), tail.end());
  double tm = 0;
  for (double x : tail) tm += x / tail.size();
  double ks = 0;
  const double n = static_cast<double>(tail.size());
  for (size_t i = 0; i < tail.size(); ++i) {
    const double f = 1 - std::exp(-tail[i] / tm);
    ks = std::max({ks, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  return {spike >= kMinSpikeFraction && spike >= kSpikeOverExponential * expo && ks < kMaxTailKs,
          fmt("J2: %zu headways, %.1f%% below 1 s (exponential with the same mean: %.1f%%); "
              "tail beyond theta = %.2f s: %zu points, KS %.4f",
              h.size(), 100 * spike, 100 * expo, th, tail.size(), ks)};
}

// ---- 11 --------------------------------------------------------------------
Outcome c11_invariants() {
  std::vector<std::pair<std::string, ScenarioConfig>> scenarios;
  for (const auto& entry : std::filesystem::directory_iterator(PLATOON_CONFIG_DIR)) {
    const std::string name = entry.path().stem().string();
    if (entry.path().extension() != ".cfg" || name.rfind("sweep", 0) == 0 || name.find("full") != std::string::npos)
      continue;
    ScenarioConfig c = load_config(entry.path().string());
    if (name == "resilience") c.sim.availability = {{18, 1000, false}, {18, 2000, true}};
    scenarios.emplace_back(name, c);
  }
  for (PolicyKind k : {PolicyKind::kBaseline, PolicyKind::kPolicyA, PolicyKind::kValueApprox}) {
    ScenarioConfig c = default_nguyen_dupuis();
    c.policy.kind = k;
    scenarios.emplace_back("nguyen-dupuis/" + to_string(k), c);
  }
  std::sort(scenarios.begin(), scenarios.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  double worst_acct = 0;
  std::string problems;
  for (const auto& [name, c] : scenarios) {
    const MetricsReport r = run_simulation(c);
    // Conservation: ids 0..n-1 exactly once; finished trips arrive by the end;
    // runs long enough to drain finish everybody.
    int cav = 0, expected = 0;
    for (const OdDemand& od : c.demand.od) expected += od.n_cavs;
    bool ok = true;
    for (size_t i = 0; i < r.trips.size(); ++i) {
      const TripRecord& t = r.trips[i];
      ok = ok && t.id == static_cast<int>(i) && (!t.finished || t.arrive <= r.summary.end_time);
      ok = ok && (r.summary.aborted || t.finished);
      cav += t.cls == VehicleClass::kCav;
    }
    if (!ok || cav != expected) problems += " " + name + ":conservation";
    worst_acct = std::max(worst_acct, max_accounting_error(r));
    const MetricsReport again = run_simulation(c);
    if (trips_csv(r) != trips_csv(again) || edges_csv(r) != edges_csv(again) ||
        policy_csv(r) != policy_csv(again) || summary_csv(r) != summary_csv(again))
      problems += " " + name + ":determinism";
  }
  if (worst_acct > kAccountingTol) problems += fmt(" accounting:%.2e", worst_acct);
  return {problems.empty(), fmt("%zu scenarios; max accounting error %.2e; byte-identical reruns: %s%s",
                                scenarios.size(), worst_acct, problems.empty() ? "yes" : "no;",
                                problems.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"threshold solver on the 3x3 grid", c1_solver_grid},
      {"solver vs value-iteration oracle", c2_oracle},
      {"routing convergence", c3_routing},
      {"regression recovery", c4_regression},
      {"formula unit checks", c5_formulas},
      {"policy ordering on Nguyen-Dupuis", c6_ordering},
      {"cost ratio vs critical density", c7_congestion_trend},
      {"baseline cost vs O-D rate", c8_demand_trend},
      {"resilience to closing edge 18", c9_resilience},
      {"arrival mixing at the cascade", c10_arrival_mixing},
      {"engine invariants", c11_invariants},
  };
  int unexpected = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool red = kKnownRed.count(id) > 0;
    std::printf("%s %2d %s: %s [%.1f s]%s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0), !o.pass && red ? " (known red)" : "");
    std::fflush(stdout);
    if (!o.pass && !red) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
