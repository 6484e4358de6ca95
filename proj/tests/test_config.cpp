#include <gtest/gtest.h>

#include <filesystem>

#include "platoon/config.hpp"
#include "platoon/error.hpp"

using namespace platoon;

namespace {

ScenarioConfig busy_config() {
  ScenarioConfig c = default_nguyen_dupuis();
  c.name = "busy \"quoted\" name";
  c.network.critical_density_veh_per_km_ln = 42.5;
  c.demand.penetration = 0.25;
  c.policy.kind = PolicyKind::kValueApprox;
  c.policy.degree_n = 2;
  c.costs.eta = 0.15;
  c.platoon.tau_c = 4.0;
  c.idm.a = 1.3;
  c.sim.seed = 987654321012345ULL;
  c.sim.availability = {{18, 1000.5, false}, {18, 2000, true}};
  c.sweep.variable = "od_rate";
  c.sweep.values = {100, 200.5};
  c.sweep.policies = {PolicyKind::kBaseline, PolicyKind::kThresholdNetwork};
  c.sweep.seeds = {1, 7};
  return c;
}

ConfigError parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return ConfigError("", 0, "");
}

}  // namespace

TEST(Config, RoundTrip) {
  ScenarioConfig custom = default_nguyen_dupuis();
  custom.network.type = NetworkType::kCustom;
  custom.network.custom_arcs = {{1, 2, 1500, 300, 2}, {2, 3, 2500, 500, 0}};
  custom.network.custom_origins = {1};
  custom.network.custom_destinations = {3};
  custom.demand.od = {{1, 3, 100, 5}};
  for (const ScenarioConfig& c : {default_nguyen_dupuis(), default_cascade(), busy_config(), custom}) {
    const std::string text = serialize_config(c);
    const ScenarioConfig back = parse_config(text);
    EXPECT_EQ(back, c) << text;
    EXPECT_EQ(serialize_config(back), text);
  }
}

TEST(Config, UnknownKeyNamesKeyAndLine) {
  const ConfigError e = parse_error("name = x\n\n# comment\nnetwork.lanes = 2\nnetwork.bogus = 3\n");
  EXPECT_EQ(e.key(), "network.bogus");
  EXPECT_EQ(e.line(), 5);
  EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos);
}

TEST(Config, Errors) {
  EXPECT_EQ(parse_error("policy.gamma = 1.5\n").key(), "policy.gamma");
  EXPECT_EQ(parse_error("demand.penetration = 0\n").key(), "demand.penetration");
  EXPECT_EQ(parse_error("sim.seed = 1\nsim.seed = 2\n").line(), 2);
  EXPECT_EQ(parse_error("just words\n").line(), 1);
  EXPECT_EQ(parse_error("network.lanes = [1,\n2\n").key(), "network.lanes");
  EXPECT_EQ(parse_error("network.lanes = \"two\"\n").key(), "network.lanes");
  EXPECT_EQ(parse_error("platoon.tau_c_s = 9\n").key(), "platoon.tau_c_s");
  EXPECT_EQ(parse_error("policy.type = magic\n").key(), "policy.type");
  const ConfigError od = parse_error(
      "demand.od = [{\"origin\": 2, \"destination\": 3, \"rate_veh_per_hr\": 10, \"n_cavs\": 1}]\n");
  EXPECT_EQ(od.key(), "demand.od");
  EXPECT_EQ(parse_error("sim.availability = [{\"edge\": 40, \"t\": 1, \"available\": false}]\n").key(),
            "sim.availability");
}

TEST(Config, MultiLineValuesAndComments) {
  const ScenarioConfig c = parse_config(
      "name = \"a # not a comment\"  # trailing\n"
      "demand.od = [  # first line\n"
      "  {\"origin\": 1, \"destination\": 3, \"rate_veh_per_hr\": 50, \"n_cavs\": 3},\n"
      "  {\"origin\": 4, \"destination\": 2, \"rate_veh_per_hr\": 60, \"n_cavs\": 4}]\n"
      "sim.seed = 5\n");
  EXPECT_EQ(c.name, "a # not a comment");
  ASSERT_EQ(c.demand.od.size(), 2u);
  EXPECT_EQ(c.demand.od[1].rate_veh_per_hr, 60);
  EXPECT_EQ(c.sim.seed, 5u);
  EXPECT_EQ(parse_error("sim.seed = 1\ndemand.od = [\n\nbogus.key = 1\n").key(), "demand.od");
}

TEST(Config, CascadeTypeSwitchesDefaults) {
  const ScenarioConfig c = parse_config("network.lanes = 3\nnetwork.type = cascade\n");
  EXPECT_EQ(c.network.type, NetworkType::kCascade);
  EXPECT_EQ(c.network.lanes, 3);
  EXPECT_EQ(c.demand.od.size(), 3u);
  EXPECT_DOUBLE_EQ(c.demand.penetration, 1.0 / 6.0);
}

TEST(Config, DefaultsMatchNominalTable) {
  const ScenarioConfig c = default_nguyen_dupuis();
  EXPECT_DOUBLE_EQ(c.costs.w1_usd_per_hr, 25.8);
  EXPECT_DOUBLE_EQ(c.costs.w2_usd_per_l, 0.868);
  EXPECT_DOUBLE_EQ(c.costs.eta, 0.1);
  EXPECT_DOUBLE_EQ(c.policy.gamma, 0.9);
  EXPECT_DOUBLE_EQ(c.policy.chi, 1.0);
  EXPECT_DOUBLE_EQ(c.platoon.tau_l, 7.5);
  EXPECT_DOUBLE_EQ(c.platoon.tau_f, 0.5);
  EXPECT_DOUBLE_EQ(c.v0(), 24.0);
  EXPECT_DOUBLE_EQ(c.network.edge_length_m, 2000);
  EXPECT_DOUBLE_EQ(c.network.d1_m, 500);
  ASSERT_EQ(c.demand.od.size(), 4u);
  for (const OdDemand& od : c.demand.od) {
    EXPECT_DOUBLE_EQ(od.rate_veh_per_hr, 216);
    EXPECT_EQ(od.n_cavs, 200);
  }
  EXPECT_DOUBLE_EQ(c.demand.penetration, 0.1);
  EXPECT_DOUBLE_EQ(c.greenshield().k_c(), 0.035);
}

TEST(Config, ShippedScenariosLoad) {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(PLATOON_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    SCOPED_TRACE(entry.path().string());
    const ScenarioConfig c = load_config(entry.path().string());
    EXPECT_EQ(parse_config(serialize_config(c)), c);
    ++n;
  }
  EXPECT_GE(n, 5);
  EXPECT_EQ(load_config(std::string(PLATOON_CONFIG_DIR) + "/nguyen_dupuis.cfg"), [] {
    ScenarioConfig c = default_nguyen_dupuis();
    c.name = "nguyen-dupuis";
    return c;
  }());
}
