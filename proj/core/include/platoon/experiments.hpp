#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "platoon/config.hpp"
#include "platoon/sim.hpp"

namespace platoon {

struct SweepRow {
  double value = 0.0;
  PolicyKind policy = PolicyKind::kBaseline;
  std::uint64_t seed = 0;
  double mean_cost = 0.0;
  double baseline_ratio = 0.0;  // NaN when the baseline cell failed
  double mean_time = 0.0;
  double mean_fuel = 0.0;
  int cav_finished = 0;
  int n_cav = 0;
  bool failed = false;  // exception, or the run stopped with CAVs in flight
  std::string note;
};

struct SweepResult {
  std::string variable;
  std::vector<SweepRow> rows;  // ordered by (value, policy, seed) as listed in the config
};

// Sets one sweep variable: critical_density (veh/km/ln), od_rate (veh/hr, all
// O-D pairs) or penetration. Throws ConfigError for an unknown variable.
void apply_sweep_value(ScenarioConfig& cfg, const std::string& variable, double value);

// Full factorial over cfg.sweep.{values, policies, seeds}. Baseline cells are
// run even when baseline is not listed, to fill baseline_ratio. `jobs` worker
// threads; results do not depend on it.
SweepResult run_sweep(const ScenarioConfig& cfg, int jobs = 1);

std::string sweep_csv(const SweepResult& r);

// Median over the seeds of one (value, policy) cell, ignoring failed rows.
// NaN if none.
double median_cost(const SweepResult& r, double value, PolicyKind policy);

double median(std::vector<double> xs);

struct ResilienceResult {
  MetricsReport report;
  EdgeId edge = 0;
  double t_off = 0.0;
  double t_on = 0.0;
  int entries_during = 0;             // entries onto the edge in [t_off, t_on)
  std::vector<EdgeId> increased;      // other edges whose mean flow rose in the window
  double first_cav_entry_after = 0.0; // first CAV entry onto the edge at or after t_on, NaN if none
  std::string event_log;
};

// Runs the threshold-network policy with the edge (1-based label) closed on
// [t_off, t_on). t_off == t_on adds no availability event.
ResilienceResult run_resilience(ScenarioConfig cfg, int edge_label, double t_off, double t_on);

}  // namespace platoon
