#include "platoon/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <map>
#include <thread>

#include "platoon/error.hpp"

namespace platoon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Cell {
  double value;
  PolicyKind policy;
  std::uint64_t seed;
  bool emit;
};

SweepRow run_cell(const ScenarioConfig& base, const std::string& variable, const Cell& cell) {
  SweepRow row;
  row.value = cell.value;
  row.policy = cell.policy;
  row.seed = cell.seed;
  try {
    ScenarioConfig cfg = base;
    apply_sweep_value(cfg, variable, cell.value);
    cfg.policy.kind = cell.policy;
    cfg.sim.seed = cell.seed;
    cfg.validate();
    const MetricsReport r = run_simulation(cfg);
    row.mean_cost = r.summary.mean_cav_cost;
    row.mean_time = r.summary.mean_cav_time;
    row.mean_fuel = r.summary.mean_cav_fuel;
    row.cav_finished = r.summary.cav_finished;
    row.n_cav = r.summary.n_cav;
    if (r.summary.cav_finished < r.summary.n_cav) {
      row.failed = true;
      row.note = r.summary.abort_reason.empty() ? "unfinished CAVs" : r.summary.abort_reason;
    }
  } catch (const std::exception& e) {
    row.failed = true;
    row.mean_cost = kNaN;
    row.note = e.what();
  }
  return row;
}

}  // namespace

void apply_sweep_value(ScenarioConfig& cfg, const std::string& variable, double value) {
  if (variable == "critical_density") {
    cfg.network.critical_density_veh_per_km_ln = value;
  } else if (variable == "od_rate") {
    for (auto& od : cfg.demand.od) od.rate_veh_per_hr = value;
  } else if (variable == "penetration") {
    cfg.demand.penetration = value;
  } else {
    throw ConfigError("sweep.variable", 0, "unknown sweep variable '" + variable + "'");
  }
}

double median(std::vector<double> xs) {
  if (xs.empty()) return kNaN;
  std::sort(xs.begin(), xs.end());
  const size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

SweepResult run_sweep(const ScenarioConfig& cfg, int jobs) {
  const SweepConfig& sw = cfg.sweep;
  if (sw.values.empty() || sw.policies.empty() || sw.seeds.empty())
    throw ConfigError("sweep.values", 0, "a sweep needs at least one value, policy and seed");
  ScenarioConfig probe = cfg;
  apply_sweep_value(probe, sw.variable, sw.values.front());

  const bool has_baseline =
      std::find(sw.policies.begin(), sw.policies.end(), PolicyKind::kBaseline) != sw.policies.end();
  std::vector<Cell> cells;
  for (double v : sw.values) {
    for (PolicyKind k : sw.policies)
      for (auto s : sw.seeds) cells.push_back({v, k, s, true});
    if (!has_baseline)
      for (auto s : sw.seeds) cells.push_back({v, PolicyKind::kBaseline, s, false});
  }

  std::vector<SweepRow> out(cells.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < cells.size(); i = next++) out[i] = run_cell(cfg, sw.variable, cells[i]);
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::map<std::pair<double, std::uint64_t>, double> base;
  for (const SweepRow& r : out)
    if (r.policy == PolicyKind::kBaseline && !r.failed) base[{r.value, r.seed}] = r.mean_cost;

  SweepResult res;
  res.variable = sw.variable;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].emit) continue;
    SweepRow r = out[i];
    const auto it = base.find({r.value, r.seed});
    r.baseline_ratio = it != base.end() && it->second > 0 && !r.failed ? r.mean_cost / it->second : kNaN;
    res.rows.push_back(std::move(r));
  }
  return res;
}

std::string sweep_csv(const SweepResult& r) {
  std::string s = "variable,value,policy,seed,mean_cav_cost_usd,baseline_ratio,mean_cav_time_s,"
                  "mean_cav_fuel_l,cav_finished,n_cav,failed,note\n";
  for (const SweepRow& row : r.rows) {
    std::string note = row.note;
    std::replace(note.begin(), note.end(), ',', ';');
    std::replace(note.begin(), note.end(), '\n', ' ');
    s += fmt("%s,%.10g,%s,%llu,%.10g,%.10g,%.10g,%.10g,%d,%d,%d,", r.variable.c_str(), row.value,
             to_string(row.policy).c_str(), static_cast<unsigned long long>(row.seed), row.mean_cost,
             row.baseline_ratio, row.mean_time, row.mean_fuel, row.cav_finished, row.n_cav,
             row.failed ? 1 : 0);
    s += note + "\n";
  }
  return s;
}

double median_cost(const SweepResult& r, double value, PolicyKind policy) {
  std::vector<double> xs;
  for (const SweepRow& row : r.rows)
    if (row.value == value && row.policy == policy && !row.failed) xs.push_back(row.mean_cost);
  return median(xs);
}

ResilienceResult run_resilience(ScenarioConfig cfg, int edge_label, double t_off, double t_on) {
  if (!(0 <= t_off && t_off <= t_on && t_on <= cfg.sim.max_time_s))
    throw ConfigError("sim.availability", 0, "need 0 <= t_off <= t_on <= max_time");
  cfg.policy.kind = PolicyKind::kThresholdNetwork;
  if (t_off < t_on) {
    cfg.sim.availability.push_back({edge_label, t_off, false});
    cfg.sim.availability.push_back({edge_label, t_on, true});
  }
  cfg.validate();

  ResilienceResult res;
  res.edge = index_of(edge_label);
  res.t_off = t_off;
  res.t_on = t_on;
  res.report = run_simulation(cfg);
  const MetricsReport& r = res.report;

  res.first_cav_entry_after = kNaN;
  for (const TripRecord& tr : r.trips)
    for (const EdgeRecord& e : tr.edges) {
      if (e.edge != res.edge) continue;
      if (e.enter >= t_off && e.enter < t_on) ++res.entries_during;
      if (tr.cls == VehicleClass::kCav && e.enter >= t_on &&
          !(e.enter >= res.first_cav_entry_after))
        res.first_cav_entry_after = e.enter;
    }

  // Mean binned flow per edge in the window and in the same length just before.
  const double before = std::max(0.0, t_off - (t_on - t_off));
  const int n_edges = [&] {
    int m = 0;
    for (const EdgeBin& b : r.edge_bins) m = std::max(m, b.edge + 1);
    return m;
  }();
  std::vector<double> in(n_edges, 0.0), pre(n_edges, 0.0);
  std::vector<int> n_in(n_edges, 0), n_pre(n_edges, 0);
  for (const EdgeBin& b : r.edge_bins) {
    if (b.bin_start >= t_off && b.bin_start < t_on) {
      in[b.edge] += b.flow;
      ++n_in[b.edge];
    } else if (b.bin_start >= before && b.bin_start < t_off) {
      pre[b.edge] += b.flow;
      ++n_pre[b.edge];
    }
  }
  for (int e = 0; e < n_edges; ++e) {
    if (e == res.edge || n_in[e] == 0 || n_pre[e] == 0) continue;
    if (in[e] / n_in[e] > pre[e] / n_pre[e]) res.increased.push_back(e);
  }

  std::string& log = res.event_log;
  if (t_off < t_on) {
    log += fmt("%.3f,edge_closed,%d\n", t_off, edge_label);
    log += fmt("%.3f,edge_reopened,%d\n", t_on, edge_label);
  }
  log += fmt("%.3f,entries_while_closed,%d\n", t_on, res.entries_during);
  for (EdgeId e : res.increased) log += fmt("%.3f,flow_increased,%d\n", t_on, label_of(e));
  if (std::isfinite(res.first_cav_entry_after))
    log += fmt("%.3f,first_cav_entry_after_reopening,%d\n", res.first_cav_entry_after, edge_label);
  log += fmt("%.3f,reroutes,%d\n", r.summary.end_time, r.counters.reroutes);
  return res;
}

}  // namespace platoon
