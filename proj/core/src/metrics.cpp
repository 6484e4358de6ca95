#include "platoon/metrics.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "platoon/error.hpp"

namespace platoon {

namespace {

void appendf(std::string& out, const char* fmt, ...) __attribute__((format(printf, 2, 3)));

void appendf(std::string& out, const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  const int n = std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  if (n < 0) throw Error("formatting failed");
  if (static_cast<size_t>(n) < sizeof buf) {
    out.append(buf, static_cast<size_t>(n));
    return;
  }
  std::string big(static_cast<size_t>(n) + 1, '\0');
  va_start(ap, fmt);
  std::vsnprintf(big.data(), big.size(), fmt, ap);
  va_end(ap);
  out.append(big.data(), static_cast<size_t>(n));
}

const char* class_name(VehicleClass c) { return c == VehicleClass::kCav ? "cav" : "background"; }

}  // namespace

std::string trips_csv(const MetricsReport& r) {
  std::string out =
      "vehicle_id,class,origin,destination,spawn_s,arrive_s,time_s,fuel_l,cost_usd,merges,"
      "merge_infeasible,route\n";
  for (const TripRecord& t : r.trips) {
    appendf(out, "%d,%s,%d,%d,%.6f,", t.id, class_name(t.cls), label_of(t.origin),
            label_of(t.destination), t.spawn);
    if (t.finished)
      appendf(out, "%.6f,%.6f,", t.arrive, t.time);
    else
      out += "unfinished,,";
    appendf(out, "%.9f,%.9f,%d,%d,", t.fuel, t.cost, t.merges, t.merge_infeasible);
    for (size_t k = 0; k < t.edges.size(); ++k) {
      if (k) out += '-';
      appendf(out, "%d", label_of(t.edges[k].edge));
    }
    out += '\n';
  }
  return out;
}

std::string edges_csv(const MetricsReport& r) {
  std::string out = "bin_start_s,edge_id,mean_speed_mps,density_veh_per_m,flow_veh_per_s\n";
  for (const EdgeBin& b : r.edge_bins)
    appendf(out, "%.3f,%d,%.6f,%.9f,%.6f\n", b.bin_start, label_of(b.edge), b.mean_speed,
            b.density, b.flow);
  return out;
}

std::string policy_csv(const MetricsReport& r) {
  std::string out = "t_s,vertex,lambda_hat,theta_s,c_s\n";
  for (const PolicyRecord& p : r.policy)
    appendf(out, "%.6f,%d,%.9f,%.6f,%.6f\n", p.t, label_of(p.vertex), p.lambda_hat, p.theta, p.c);
  return out;
}

std::string summary_csv(const MetricsReport& r) {
  const Summary& s = r.summary;
  const Counters& c = r.counters;
  std::string out =
      "scenario,policy,seed,n_cav,n_background,cav_finished,background_finished,mean_cav_cost_usd,"
      "mean_cav_time_s,mean_cav_fuel_l,end_time_s,merges,merge_infeasible,headway_clamped,"
      "no_route_fallback,distance_clamped,zero_common_path,solver_failures,reroutes,events,"
      "aborted,abort_reason\n";
  appendf(out, "%s,%s,%llu,%d,%d,%d,%d,%.9f,%.6f,%.9f,%.6f,%d,%d,%d,%d,%d,%d,%d,%d,%lld,%d,%s\n",
          s.scenario.c_str(), to_string(s.policy).c_str(), static_cast<unsigned long long>(s.seed),
          s.n_cav, s.n_background, s.cav_finished, s.background_finished, s.mean_cav_cost,
          s.mean_cav_time, s.mean_cav_fuel, s.end_time, c.merges, c.merge_infeasible,
          c.headway_clamped, c.no_route_fallback, c.distance_clamped, c.zero_common_path,
          c.solver_failures, c.reroutes, c.events, s.aborted ? 1 : 0, s.abort_reason.c_str());
  return out;
}

void write_report(const MetricsReport& r, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  auto put = [&](const char* name, const std::string& body) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << body;
    if (!f) throw Error("cannot write " + path.string());
  };
  put("trips.csv", trips_csv(r));
  put("edges.csv", edges_csv(r));
  put("policy.csv", policy_csv(r));
  put("summary.csv", summary_csv(r));
}

double max_accounting_error(const MetricsReport& r) {
  double worst = 0.0;
  for (const TripRecord& t : r.trips) {
    double sum = 0.0;
    for (const EdgeRecord& e : t.edges) sum += e.cost;
    worst = std::max(worst, std::abs(sum - t.cost));
  }
  return worst;
}

}  // namespace platoon
