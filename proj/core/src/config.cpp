#include "platoon/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <sstream>
#include <tuple>

#include "platoon/error.hpp"

namespace platoon {

using nlohmann::json;

std::string to_string(NetworkType t) {
  switch (t) {
    case NetworkType::kNguyenDupuis: return "nguyen-dupuis";
    case NetworkType::kCascade: return "cascade";
    case NetworkType::kCustom: return "custom";
  }
  return "?";
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::kBaseline: return "baseline";
    case PolicyKind::kPolicyA: return "policy-a";
    case PolicyKind::kValueApprox: return "value-approx";
    case PolicyKind::kThresholdNetwork: return "threshold-network";
  }
  return "?";
}

PolicyKind parse_policy_kind(const std::string& name) {
  for (auto k : {PolicyKind::kBaseline, PolicyKind::kPolicyA, PolicyKind::kValueApprox,
                 PolicyKind::kThresholdNetwork})
    if (to_string(k) == name) return k;
  throw Error("unknown policy '" + name +
              "' (expected baseline, policy-a, value-approx or threshold-network)");
}

NetworkType parse_network_type(const std::string& name) {
  for (auto t : {NetworkType::kNguyenDupuis, NetworkType::kCascade, NetworkType::kCustom})
    if (to_string(t) == name) return t;
  throw Error("unknown network type '" + name + "'");
}

bool NetworkConfig::operator==(const NetworkConfig& o) const {
  auto arcs_eq = [](const std::vector<Arc>& a, const std::vector<Arc>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (a[i].from != b[i].from || a[i].to != b[i].to || a[i].length != b[i].length ||
          a[i].d1 != b[i].d1 || a[i].lanes != b[i].lanes)
        return false;
    return true;
  };
  return type == o.type && edge_length_m == o.edge_length_m && d1_m == o.d1_m &&
         lanes == o.lanes && critical_density_veh_per_km_ln == o.critical_density_veh_per_km_ln &&
         cascade_junctions == o.cascade_junctions && cascade_d2_m == o.cascade_d2_m &&
         arcs_eq(custom_arcs, o.custom_arcs) && custom_origins == o.custom_origins &&
         custom_destinations == o.custom_destinations;
}

CostWeights CostsConfig::weights() const { return {w1_usd_per_hr / 3600.0, w2_usd_per_l}; }

FuelModel CostsConfig::fuel() const {
  FuelModel fm;
  fm.a3 = a3;
  fm.a1 = a1;
  fm.phi = phi_l_per_100km / 100000.0;
  fm.alpha = alpha;
  fm.eta = eta;
  return fm;
}

GreenshieldModel ScenarioConfig::greenshield() const {
  return GreenshieldModel::from_critical_density(idm.v0,
                                                 network.critical_density_veh_per_km_ln / 1000.0);
}

namespace {

// One entry per accepted key: read the value from a config, write it back.
struct KeySpec {
  const char* key;
  std::function<json(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, const json&)> set;
};

template <class T>
T as(const json& j) {
  return j.get<T>();
}

int as_int(const json& j) {
  if (j.is_number_integer()) return j.get<int>();
  if (j.is_number_float() && j.get<double>() == static_cast<int>(j.get<double>()))
    return static_cast<int>(j.get<double>());
  throw Error("expected an integer");
}

double as_double(const json& j) {
  if (!j.is_number()) throw Error("expected a number");
  return j.get<double>();
}

std::string as_string(const json& j) {
  if (!j.is_string()) throw Error("expected a string");
  return j.get<std::string>();
}

#define PLATOON_NUM(KEY, FIELD)                                         \
  KeySpec {                                                             \
    KEY, [](const ScenarioConfig& c) { return json(c.FIELD); },         \
        [](ScenarioConfig& c, const json& j) { c.FIELD = as_double(j); } \
  }
#define PLATOON_INT(KEY, FIELD)                                      \
  KeySpec {                                                          \
    KEY, [](const ScenarioConfig& c) { return json(c.FIELD); },      \
        [](ScenarioConfig& c, const json& j) { c.FIELD = as_int(j); } \
  }

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"name", [](const ScenarioConfig& c) { return json(c.name); },
       [](ScenarioConfig& c, const json& j) { c.name = as_string(j); }},
      {"network.type", [](const ScenarioConfig& c) { return json(to_string(c.network.type)); },
       [](ScenarioConfig& c, const json& j) { c.network.type = parse_network_type(as_string(j)); }},
      PLATOON_NUM("network.edge_length_m", network.edge_length_m),
      PLATOON_NUM("network.d1_m", network.d1_m),
      PLATOON_INT("network.lanes", network.lanes),
      PLATOON_NUM("network.critical_density_veh_per_km_ln", network.critical_density_veh_per_km_ln),
      PLATOON_INT("network.cascade.n_junctions", network.cascade_junctions),
      PLATOON_NUM("network.cascade.d2_m", network.cascade_d2_m),
      {"network.custom.arcs",
       [](const ScenarioConfig& c) {
         json a = json::array();
         for (const Arc& x : c.network.custom_arcs) {
           json row = {x.from, x.to, x.length, x.d1};
           if (x.lanes > 0) row.push_back(x.lanes);
           a.push_back(row);
         }
         return a;
       },
       [](ScenarioConfig& c, const json& j) {
         if (!j.is_array()) throw Error("expected [[from, to, length_m, d1_m(, lanes)], ...]");
         c.network.custom_arcs.clear();
         for (const json& row : j) {
           if (!row.is_array() || row.size() < 4 || row.size() > 5)
             throw Error("each arc is [from, to, length_m, d1_m] or with lanes appended");
           Arc a{as_int(row[0]), as_int(row[1]), as_double(row[2]), as_double(row[3]),
                 row.size() == 5 ? as_int(row[4]) : 0};
           c.network.custom_arcs.push_back(a);
         }
       }},
      {"network.custom.origins", [](const ScenarioConfig& c) { return json(c.network.custom_origins); },
       [](ScenarioConfig& c, const json& j) { c.network.custom_origins = as<std::vector<int>>(j); }},
      {"network.custom.destinations",
       [](const ScenarioConfig& c) { return json(c.network.custom_destinations); },
       [](ScenarioConfig& c, const json& j) {
         c.network.custom_destinations = as<std::vector<int>>(j);
       }},
      {"demand.od",
       [](const ScenarioConfig& c) {
         json a = json::array();
         for (const OdDemand& d : c.demand.od)
           a.push_back({{"origin", d.origin},
                        {"destination", d.destination},
                        {"rate_veh_per_hr", d.rate_veh_per_hr},
                        {"n_cavs", d.n_cavs}});
         return a;
       },
       [](ScenarioConfig& c, const json& j) {
         if (!j.is_array()) throw Error("expected a list of O-D objects");
         c.demand.od.clear();
         for (const json& o : j) {
           if (!o.is_object()) throw Error("expected {origin, destination, rate_veh_per_hr, n_cavs}");
           for (const auto& [k, v] : o.items())
             if (k != "origin" && k != "destination" && k != "rate_veh_per_hr" && k != "n_cavs")
               throw Error("unknown O-D field '" + k + "'");
           OdDemand d;
           d.origin = as_int(o.at("origin"));
           d.destination = as_int(o.at("destination"));
           d.rate_veh_per_hr = as_double(o.at("rate_veh_per_hr"));
           d.n_cavs = as_int(o.at("n_cavs"));
           c.demand.od.push_back(d);
         }
       }},
      PLATOON_NUM("demand.penetration", demand.penetration),
      {"policy.type", [](const ScenarioConfig& c) { return json(to_string(c.policy.kind)); },
       [](ScenarioConfig& c, const json& j) { c.policy.kind = parse_policy_kind(as_string(j)); }},
      PLATOON_NUM("policy.gamma", policy.gamma),
      PLATOON_NUM("policy.psi", policy.psi),
      PLATOON_INT("policy.M", policy.M),
      PLATOON_NUM("policy.chi", policy.chi),
      PLATOON_INT("policy.value_approx.degree_n", policy.degree_n),
      PLATOON_INT("policy.value_approx.window_l", policy.window_l),
      PLATOON_INT("policy.value_approx.window_y", policy.window_y),
      PLATOON_NUM("costs.w1_usd_per_hr", costs.w1_usd_per_hr),
      PLATOON_NUM("costs.w2_usd_per_l", costs.w2_usd_per_l),
      PLATOON_NUM("costs.phi_l_per_100km", costs.phi_l_per_100km),
      PLATOON_NUM("costs.eta", costs.eta),
      PLATOON_NUM("costs.alpha", costs.alpha),
      PLATOON_NUM("costs.a3", costs.a3),
      PLATOON_NUM("costs.a1", costs.a1),
      PLATOON_NUM("platoon.tau_l_s", platoon.tau_l),
      PLATOON_NUM("platoon.tau_f_s", platoon.tau_f),
      PLATOON_NUM("platoon.tau_c_s", platoon.tau_c),
      PLATOON_NUM("platoon.t_s_s", platoon.t_s),
      PLATOON_NUM("platoon.h0_s", platoon.h0),
      PLATOON_NUM("idm.v0", idm.v0),
      PLATOON_NUM("idm.s0", idm.s0),
      PLATOON_NUM("idm.t_hw", idm.t_hw),
      PLATOON_NUM("idm.a", idm.a),
      PLATOON_NUM("idm.b", idm.b),
      PLATOON_NUM("idm.delta", idm.delta),
      {"sim.seed", [](const ScenarioConfig& c) { return json(c.sim.seed); },
       [](ScenarioConfig& c, const json& j) {
         if (!j.is_number_unsigned()) throw Error("expected a non-negative integer");
         c.sim.seed = j.get<std::uint64_t>();
       }},
      PLATOON_NUM("sim.max_time_s", sim.max_time_s),
      PLATOON_NUM("sim.bin_s", sim.bin_s),
      PLATOON_NUM("sim.v_floor_mps", sim.v_floor),
      PLATOON_NUM("sim.speed_cap", sim.speed_cap),
      {"sim.availability",
       [](const ScenarioConfig& c) {
         json a = json::array();
         for (const auto& e : c.sim.availability)
           a.push_back({{"edge", e.edge}, {"t", e.t}, {"available", e.available}});
         return a;
       },
       [](ScenarioConfig& c, const json& j) {
         if (!j.is_array()) throw Error("expected a list of {edge, t, available}");
         c.sim.availability.clear();
         for (const json& o : j) {
           if (!o.is_object()) throw Error("expected {edge, t, available}");
           for (const auto& [k, v] : o.items())
             if (k != "edge" && k != "t" && k != "available")
               throw Error("unknown availability field '" + k + "'");
           if (!o.at("available").is_boolean()) throw Error("'available' must be true or false");
           c.sim.availability.push_back(
               {as_int(o.at("edge")), as_double(o.at("t")), o.at("available").get<bool>()});
         }
       }},
      {"sweep.variable", [](const ScenarioConfig& c) { return json(c.sweep.variable); },
       [](ScenarioConfig& c, const json& j) { c.sweep.variable = as_string(j); }},
      {"sweep.values", [](const ScenarioConfig& c) { return json(c.sweep.values); },
       [](ScenarioConfig& c, const json& j) { c.sweep.values = as<std::vector<double>>(j); }},
      {"sweep.policies",
       [](const ScenarioConfig& c) {
         json a = json::array();
         for (auto k : c.sweep.policies) a.push_back(to_string(k));
         return a;
       },
       [](ScenarioConfig& c, const json& j) {
         c.sweep.policies.clear();
         for (const auto& s : as<std::vector<std::string>>(j))
           c.sweep.policies.push_back(parse_policy_kind(s));
       }},
      {"sweep.seeds", [](const ScenarioConfig& c) { return json(c.sweep.seeds); },
       [](ScenarioConfig& c, const json& j) { c.sweep.seeds = as<std::vector<std::uint64_t>>(j); }},
  };
  return table;
}

#undef PLATOON_NUM
#undef PLATOON_INT

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment while leaving '#' inside JSON strings alone.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

// Net count of open [ and { outside string literals.
int bracket_depth(const std::string& s) {
  int depth = 0;
  bool in_string = false;
  for (size_t i = 0; i < s.size(); ++i) {
    const char ch = s[i];
    if (in_string) {
      if (ch == '\\') ++i;
      else if (ch == '"') in_string = false;
    } else if (ch == '"') {
      in_string = true;
    } else if (ch == '[' || ch == '{') {
      ++depth;
    } else if (ch == ']' || ch == '}') {
      --depth;
    }
  }
  return depth;
}

json parse_value(const std::string& raw) {
  json j = json::parse(raw, nullptr, false);
  if (!j.is_discarded()) return j;
  // Bare words such as `nguyen-dupuis` are strings.
  if (!raw.empty() && raw.find_first_of("[]{}\",") == std::string::npos) return json(raw);
  throw Error("malformed value '" + raw + "'");
}

}  // namespace

void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value,
                   int line) {
  for (const KeySpec& spec : key_table()) {
    if (key != spec.key) continue;
    try {
      spec.set(cfg, parse_value(value));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(key, line, e.what());
    }
    return;
  }
  throw ConfigError(key, line, "unknown key");
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg = default_nguyen_dupuis();
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::vector<std::pair<std::string, int>> seen;
  // `network.type` picks the defaults, so it is applied first.
  std::vector<std::tuple<std::string, std::string, int>> settings;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    // A list or object may continue over following lines until its brackets close.
    const int start = line_no;
    while (bracket_depth(value) > 0 && std::getline(in, raw)) {
      ++line_no;
      value += ' ' + trim(strip_comment(raw));
    }
    if (bracket_depth(value) != 0) throw ConfigError(key, start, "unbalanced brackets");
    if (key.empty()) throw ConfigError("", line_no, "missing key");
    if (value.empty()) throw ConfigError(key, start, "missing value");
    for (const auto& [k, l] : seen)
      if (k == key)
        throw ConfigError(key, start, "duplicate key (first set on line " + std::to_string(l) + ")");
    seen.emplace_back(key, start);
    settings.emplace_back(key, value, start);
  }
  for (const auto& [key, value, l] : settings) {
    if (key != "network.type") continue;
    ScenarioConfig probe;
    apply_setting(probe, key, value, l);
    if (probe.network.type == NetworkType::kCascade) cfg = default_cascade();
    apply_setting(cfg, key, value, l);
  }
  for (const auto& [key, value, l] : settings)
    if (key != "network.type") apply_setting(cfg, key, value, l);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("", 0, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::string out;
  for (const KeySpec& spec : key_table()) {
    out += spec.key;
    out += " = ";
    out += spec.get(cfg).dump();
    out += '\n';
  }
  return out;
}

void ScenarioConfig::validate() const {
  auto check = [](bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(key, 0, what);
  };
  check(network.edge_length_m > 0, "network.edge_length_m", "must be positive");
  check(network.d1_m > 0, "network.d1_m", "must be positive");
  check(network.type != NetworkType::kNguyenDupuis || 2 * network.d1_m < network.edge_length_m,
        "network.d1_m", "must be shorter than half the edge length");
  check(network.lanes >= 1, "network.lanes", "must be >= 1");
  check(network.critical_density_veh_per_km_ln > 0, "network.critical_density_veh_per_km_ln",
        "must be positive");
  check(network.cascade_junctions >= 1, "network.cascade.n_junctions", "must be >= 1");
  check(network.cascade_d2_m > network.d1_m, "network.cascade.d2_m", "must exceed network.d1_m");
  check(demand.penetration > 0 && demand.penetration <= 1, "demand.penetration",
        "must lie in (0, 1]");
  for (const OdDemand& d : demand.od) {
    check(d.rate_veh_per_hr > 0, "demand.od", "rates must be positive");
    check(d.n_cavs >= 0, "demand.od", "n_cavs must be >= 0");
  }
  check(policy.gamma > 0 && policy.gamma < 1, "policy.gamma", "must lie in (0, 1)");
  check(policy.psi > 0 && policy.psi < 1, "policy.psi", "must lie in (0, 1)");
  check(policy.M >= 1, "policy.M", "must be >= 1");
  check(policy.chi > 0 && policy.chi <= 1, "policy.chi", "must lie in (0, 1]");
  check(policy.degree_n >= 0, "policy.value_approx.degree_n", "must be >= 0");
  check(policy.window_l + 1 > policy.degree_n, "policy.value_approx.window_l",
        "window_l + 1 must exceed degree_n");
  check(policy.window_y >= 0, "policy.value_approx.window_y", "must be >= 0");
  check(costs.w1_usd_per_hr > 0, "costs.w1_usd_per_hr", "must be positive");
  check(costs.w2_usd_per_l > 0, "costs.w2_usd_per_l", "must be positive");
  check(costs.phi_l_per_100km > 0, "costs.phi_l_per_100km", "must be positive");
  check(costs.eta > 0 && costs.eta < 1, "costs.eta", "must lie in (0, 1)");
  check(costs.alpha > 0 && costs.a3 > 0 && costs.a1 > 0, "costs.alpha", "fuel coefficients must be positive");
  check(platoon.tau_f > 0 && platoon.tau_f < platoon.tau_c && platoon.tau_c < platoon.tau_l,
        "platoon.tau_c_s", "must satisfy 0 < tau_f < tau_c < tau_l");
  check(platoon.t_s > 0, "platoon.t_s_s", "must be positive");
  check(platoon.h0 > 0, "platoon.h0_s", "must be positive");
  check(idm.v0 > 0 && idm.s0 >= 0 && idm.t_hw > 0 && idm.a > 0 && idm.b > 0 && idm.delta >= 1,
        "idm.v0", "IDM parameters must be positive with delta >= 1");
  check(sim.max_time_s > 0, "sim.max_time_s", "must be positive");
  check(sim.bin_s > 0, "sim.bin_s", "must be positive");
  check(sim.v_floor > 0 && sim.v_floor <= idm.v0, "sim.v_floor_mps", "must lie in (0, v0]");
  check(sim.speed_cap > 1, "sim.speed_cap", "must exceed 1");
  check(sweep.variable == "critical_density" || sweep.variable == "od_rate" ||
            sweep.variable == "penetration",
        "sweep.variable", "expected critical_density, od_rate or penetration");

  // Labels must exist in the network; building it checks geometry and reachability.
  RoadNetwork net = [&] {
    try {
      return build_network(*this);
    } catch (const GeometryError& e) {
      throw ConfigError("network", 0, e.what());
    }
  }();
  for (const OdDemand& d : demand.od) {
    const int o = index_of(d.origin), t = index_of(d.destination);
    check(o >= 0 && o < net.num_vertices() &&
              std::find(net.origins().begin(), net.origins().end(), o) != net.origins().end(),
          "demand.od", "origin " + std::to_string(d.origin) + " is not a network origin");
    check(t >= 0 && t < net.num_vertices() && net.is_destination(t), "demand.od",
          "destination " + std::to_string(d.destination) + " is not a network destination");
  }
  for (const auto& a : sim.availability)
    check(a.edge >= 1 && a.edge <= net.num_edges() && a.t >= 0, "sim.availability",
          "edge " + std::to_string(a.edge) + " does not exist or time is negative");
}

ScenarioConfig default_nguyen_dupuis() {
  ScenarioConfig c;
  c.name = "nguyen-dupuis";
  c.network.type = NetworkType::kNguyenDupuis;
  for (int o : {1, 4})
    for (int d : {2, 3}) c.demand.od.push_back({o, d, 216.0, 200});
  c.demand.penetration = 0.1;
  return c;
}

ScenarioConfig default_cascade() {
  ScenarioConfig c;
  c.name = "cascade";
  c.network.type = NetworkType::kCascade;
  c.network.d1_m = 1000.0;
  c.network.cascade_d2_m = 30000.0;
  c.network.cascade_junctions = 2;
  c.network.lanes = 2;
  CascadeLayout L{2};
  c.demand.od = {{L.mainline_origin(), L.destination(), 108.0, 500},
                 {L.ramp_origin(1), L.destination(), 108.0, 500},
                 {L.ramp_origin(2), L.destination(), 180.0, 1000}};
  c.demand.penetration = 1.0 / 6.0;
  c.sim.max_time_s = 40000.0;
  c.sim.bin_s = 600.0;
  return c;
}

RoadNetwork build_network(const ScenarioConfig& cfg) {
  const NetworkConfig& n = cfg.network;
  switch (n.type) {
    case NetworkType::kNguyenDupuis: return build_nguyen_dupuis(n.edge_length_m, n.d1_m, n.lanes);
    case NetworkType::kCascade:
      return build_cascade(n.cascade_junctions, n.cascade_d2_m, n.d1_m, n.lanes);
    case NetworkType::kCustom: {
      std::vector<Arc> arcs = n.custom_arcs;
      for (Arc& a : arcs)
        if (a.lanes == 0) a.lanes = n.lanes;
      return RoadNetwork::from_arcs(arcs, n.custom_origins, n.custom_destinations);
    }
  }
  throw GeometryError("unknown network type");
}

}  // namespace platoon
