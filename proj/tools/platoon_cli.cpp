// platoon: solve-policy | run | sweep | resilience
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "platoon/config.hpp"
#include "platoon/error.hpp"
#include "platoon/experiments.hpp"
#include "platoon/metrics.hpp"
#include "platoon/sim.hpp"
#include "platoon/threshold.hpp"

using namespace platoon;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFailure = 2;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::string policy;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

ScenarioConfig load(const Common& o, ScenarioConfig fallback) {
  ScenarioConfig cfg = o.config.empty() ? std::move(fallback) : load_config(o.config);
  for (const std::string& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(s, 0, "--set expects key=value");
    auto trim = [](std::string x) {
      const auto a = x.find_first_not_of(" \t"), b = x.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : x.substr(a, b - a + 1);
    };
    apply_setting(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  if (!o.policy.empty()) {
    try {
      cfg.policy.kind = parse_policy_kind(o.policy);
    } catch (const Error& e) {
      throw ConfigError("--policy", 0, e.what());
    }
  }
  if (o.seed_given) cfg.sim.seed = o.seed;
  cfg.validate();
  return cfg;
}

std::string out_dir(const Common& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("PLATOON_OUT_DIR"); env && *env) return env;
  return "out";
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
  if (!f) throw Error("cannot write " + (std::filesystem::path(dir) / name).string());
  f << text;
}

void print_solution(double lambda_hr, const PolicyParams& p, const ThresholdSolution& s,
                    bool converged) {
  std::printf("lambda_veh_per_hr,d1_m,d2_m,theta_s,c_s,z_usd,r1,r2,r3,degenerate,converged\n");
  std::printf("%.10g,%.10g,%.10g,%.12g,%.12g,%.12g,%.3e,%.3e,%.3e,%d,%d\n", lambda_hr, p.d1, p.d2,
              s.theta, s.c, s.z, s.residuals[0], s.residuals[1], s.residuals[2],
              s.degenerate ? 1 : 0, converged ? 1 : 0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mesoscopic CAV platooning simulator"};
  app.require_subcommand(1);

  Common o;
  auto add_common = [&](CLI::App* sub, bool with_policy) {
    sub->add_option("--config", o.config, "scenario file")->check(CLI::ExistingFile);
    sub->add_option("--set", o.sets, "override, key=value (repeatable)");
    sub->add_option("--out", o.out, "output directory (default $PLATOON_OUT_DIR or ./out)");
    sub->add_option("--seed", o.seed, "random seed")->each([&](const std::string&) { o.seed_given = true; });
    if (with_policy)
      sub->add_option("--policy", o.policy, "baseline | policy-a | value-approx | threshold-network");
  };

  double lambda_hr = 108.0, d2 = 30000.0, d1 = 1000.0;
  auto* solve = app.add_subcommand("solve-policy", "solve the threshold system for one (lambda, D2)");
  solve->add_option("--lambda", lambda_hr, "arrival rate, veh/hr")->check(CLI::PositiveNumber);
  solve->add_option("--d2", d2, "cruising distance, m")->check(CLI::NonNegativeNumber);
  solve->add_option("--d1", d1, "coordinating zone, m")->check(CLI::PositiveNumber);
  solve->add_option("--config", o.config, "take cost, fuel and gamma values from a scenario")
      ->check(CLI::ExistingFile);
  solve->add_option("--set", o.sets, "override, key=value (repeatable)");

  auto* run = app.add_subcommand("run", "simulate one scenario and write trips/edges/policy/summary CSVs");
  add_common(run, true);

  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "full factorial sweep; writes sweep.csv");
  add_common(sweep, false);
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  int edge = 18;
  double t_off = 1000.0, t_on = 2000.0;
  auto* res = app.add_subcommand("resilience", "close one edge for a time window under threshold-network");
  add_common(res, false);
  res->add_option("--edge", edge, "edge label (1-based)");
  res->add_option("--t-off", t_off, "closing time, s");
  res->add_option("--t-on", t_on, "reopening time, s");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*solve) {
      const ScenarioConfig cfg = load(o, default_nguyen_dupuis());
      PolicyParams p;
      p.w = cfg.costs.weights();
      p.fm = cfg.costs.fuel();
      p.v0 = cfg.v0();
      p.gamma = cfg.policy.gamma;
      p.lambda = lambda_hr / 3600.0;
      p.d1 = d1;
      p.d2 = d2;
      try {
        print_solution(lambda_hr, p, solve_threshold(p), true);
      } catch (const SolverFailure& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        print_solution(lambda_hr, p, e.best(), false);
        return kFailure;
      }
      return kOk;
    }

    if (*run) {
      const ScenarioConfig cfg = load(o, default_nguyen_dupuis());
      const MetricsReport r = run_simulation(cfg);
      const std::string dir = out_dir(o);
      write_report(r, dir);
      std::printf("%s", summary_csv(r).c_str());
      std::fprintf(stderr, "wrote %s/{trips,edges,policy,summary}.csv\n", dir.c_str());
      if (r.summary.aborted) {
        std::fprintf(stderr, "run stopped early: %s\n", r.summary.abort_reason.c_str());
        if (r.summary.abort_reason.find("watchdog") != std::string::npos) return kFailure;
      }
      return kOk;
    }

    if (*sweep) {
      const ScenarioConfig cfg = load(o, default_nguyen_dupuis());
      const SweepResult r = run_sweep(cfg, jobs);
      const std::string dir = out_dir(o);
      const std::string csv = sweep_csv(r);
      write_file(dir, "sweep.csv", csv);
      std::printf("%s", csv.c_str());
      int failed = 0;
      for (const SweepRow& row : r.rows) failed += row.failed ? 1 : 0;
      if (failed) std::fprintf(stderr, "%d sweep cell(s) flagged as failed\n", failed);
      return kOk;
    }

    if (*res) {
      ScenarioConfig base = default_nguyen_dupuis();
      base.sim.max_time_s = 4000.0;
      const ScenarioConfig cfg = load(o, base);
      const ResilienceResult r = run_resilience(cfg, edge, t_off, t_on);
      const std::string dir = out_dir(o);
      write_report(r.report, dir);
      write_file(dir, "events.csv", "t_s,event,value\n" + r.event_log);
      std::printf("t_s,event,value\n%s", r.event_log.c_str());
      if (r.report.summary.abort_reason.find("watchdog") != std::string::npos) return kFailure;
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const SolverFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kUsage;
}
