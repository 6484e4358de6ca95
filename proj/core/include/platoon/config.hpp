#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "platoon/dynamics.hpp"
#include "platoon/network.hpp"

namespace platoon {

enum class NetworkType { kNguyenDupuis, kCascade, kCustom };
enum class PolicyKind { kBaseline, kPolicyA, kValueApprox, kThresholdNetwork };

std::string to_string(NetworkType t);
std::string to_string(PolicyKind k);
// Throws Error for an unknown name.
PolicyKind parse_policy_kind(const std::string& name);
NetworkType parse_network_type(const std::string& name);

struct NetworkConfig {
  NetworkType type = NetworkType::kNguyenDupuis;
  double edge_length_m = 2000.0;
  double d1_m = 500.0;
  int lanes = 1;
  double critical_density_veh_per_km_ln = 35.0;
  int cascade_junctions = 2;
  double cascade_d2_m = 30000.0;
  std::vector<Arc> custom_arcs;  // 1-based labels
  std::vector<int> custom_origins;
  std::vector<int> custom_destinations;

  bool operator==(const NetworkConfig&) const;
};

struct OdDemand {
  int origin = 1;       // label
  int destination = 2;  // label
  double rate_veh_per_hr = 216.0;
  int n_cavs = 200;

  bool operator==(const OdDemand&) const = default;
};

struct DemandConfig {
  std::vector<OdDemand> od;
  double penetration = 0.1;  // CAV share zeta; 1 disables background traffic

  bool operator==(const DemandConfig&) const = default;
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kThresholdNetwork;
  double gamma = 0.9;
  double psi = 0.9;
  int M = 50;
  double chi = 1.0;
  int degree_n = 3;
  int window_l = 30;
  int window_y = 20;

  bool operator==(const PolicyConfig&) const = default;
};

struct CostsConfig {
  double w1_usd_per_hr = 25.8;
  double w2_usd_per_l = 0.868;
  double phi_l_per_100km = 32.2;
  double eta = 0.1;
  double alpha = 3.51e-7;
  double a3 = 3.51e-7;
  double a1 = 4.07e-4;

  bool operator==(const CostsConfig&) const = default;
  CostWeights weights() const;
  FuelModel fuel() const;
};

struct AvailabilityEvent {
  int edge = 1;  // label
  double t = 0.0;
  bool available = true;

  bool operator==(const AvailabilityEvent&) const = default;
};

struct SimConfig {
  std::uint64_t seed = 1;
  double max_time_s = 20000.0;
  double bin_s = 100.0;
  double v_floor = 2.0;     // lowest mesoscopic cruise speed, m/s
  double speed_cap = 1.5;   // reference-speed cap as a multiple of v0
  std::vector<AvailabilityEvent> availability;

  bool operator==(const SimConfig&) const = default;
};

struct SweepConfig {
  std::string variable = "critical_density";  // critical_density | od_rate | penetration
  std::vector<double> values;
  std::vector<PolicyKind> policies;
  std::vector<std::uint64_t> seeds;

  bool operator==(const SweepConfig&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  NetworkConfig network;
  DemandConfig demand;
  PolicyConfig policy;
  CostsConfig costs;
  PlatoonParams platoon;
  IdmParams idm;
  SimConfig sim;
  SweepConfig sweep;

  bool operator==(const ScenarioConfig&) const = default;

  double v0() const { return idm.v0; }
  GreenshieldModel greenshield() const;
  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Nguyen-Dupuis desk-scale defaults: 200 CAVs per O-D at 216 veh/hr.
ScenarioConfig default_nguyen_dupuis();
// Two-junction cascade: mainline and ramp 1 at 108 veh/hr, ramp 2 at 180 veh/hr.
ScenarioConfig default_cascade();

// `key = value` lines; values are JSON literals (bare words are read as
// strings). `#` starts a comment. Keys not listed in the reference are errors.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& cfg);

// Applies one `key = value` assignment; used by the parser and CLI overrides.
void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value,
                   int line = 0);

RoadNetwork build_network(const ScenarioConfig& cfg);

}  // namespace platoon
