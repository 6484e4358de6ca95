#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "platoon/config.hpp"

namespace platoon {

enum class VehicleClass : std::uint8_t { kCav, kBackground };

// One edge of a trip. Times are absolute seconds.
struct EdgeRecord {
  EdgeId edge = 0;
  double enter = 0.0;        // entry at the upstream vertex
  double coord_entry = 0.0;  // start of the coordinating zone
  double exit = 0.0;         // junction pass at the downstream vertex
  double v_cruise = 0.0;
  double v_coord = 0.0;
  bool follower = false;     // cruised as a platoon follower
  double u = 0.0;            // time reduction applied in the coordinating zone
  int merged_with = -1;      // vehicle whose junction pass this one joined
  double cost = 0.0;
  double fuel = 0.0;
};

struct TripRecord {
  int id = 0;
  VehicleClass cls = VehicleClass::kCav;
  VertexId origin = 0;
  VertexId destination = 0;
  double spawn = 0.0;
  double arrive = 0.0;  // NaN while unfinished
  bool finished = false;
  double time = 0.0;
  double fuel = 0.0;
  double cost = 0.0;
  int merges = 0;
  int merge_infeasible = 0;
  std::vector<EdgeRecord> edges;
};

struct EdgeBin {
  double bin_start = 0.0;
  EdgeId edge = 0;
  double mean_speed = 0.0;  // entry cruise speed, v0 if nobody entered
  double density = 0.0;     // time-averaged weighted vehicles per metre (all lanes)
  double flow = 0.0;        // entries per second
  int entries = 0;
  int cav_entries = 0;
};

struct PolicyRecord {
  double t = 0.0;
  VertexId vertex = 0;
  double lambda_hat = 0.0;
  double theta = 0.0;
  double c = 0.0;
};

// CAV coordination-zone entries at a vertex, with the detector headway pushed
// into the arrival-rate estimator.
struct ArrivalRecord {
  double t = 0.0;
  VertexId vertex = 0;
  double headway = 0.0;
};

struct Counters {
  long long events = 0;
  int merges = 0;
  int merge_infeasible = 0;
  int headway_clamped = 0;
  int no_route_fallback = 0;
  int distance_clamped = 0;
  int zero_common_path = 0;
  int solver_failures = 0;
  int reroutes = 0;
  int cache_hits = 0;
  int cache_misses = 0;
};

struct Summary {
  std::string scenario;
  PolicyKind policy = PolicyKind::kBaseline;
  std::uint64_t seed = 0;
  int n_cav = 0;
  int n_background = 0;
  int cav_finished = 0;
  int background_finished = 0;
  double mean_cav_cost = 0.0;
  double mean_cav_time = 0.0;
  double mean_cav_fuel = 0.0;
  double end_time = 0.0;
  bool aborted = false;  // watchdog or max_time stopped the run with vehicles in flight
  std::string abort_reason;
};

struct MetricsReport {
  Summary summary;
  Counters counters;
  std::vector<TripRecord> trips;  // ordered by vehicle id
  std::vector<EdgeBin> edge_bins;  // ordered by (bin, edge)
  std::vector<PolicyRecord> policy;
  std::vector<ArrivalRecord> arrivals;
};

// Runs one scenario. Deterministic in (config, config.sim.seed).
MetricsReport run_simulation(const ScenarioConfig& cfg);

// Predicted headway x + u_prev, clamped at 0. `clamped` is set when clamping happened.
double predicted_headway(double x, double u_prev, bool* clamped = nullptr);

}  // namespace platoon
