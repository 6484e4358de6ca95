#include "platoon/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <tuple>

#include "platoon/arrivals.hpp"
#include "platoon/error.hpp"
#include "platoon/routing.hpp"
#include "platoon/threshold.hpp"
#include "platoon/value_approx.hpp"

namespace platoon {

double predicted_headway(double x, double u_prev, bool* clamped) {
  if (!(x > 0)) throw std::invalid_argument("predicted_headway: x must be positive");
  const double h = x + u_prev;
  if (clamped) *clamped = h < 0;
  return std::max(0.0, h);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class EventType : std::uint8_t { kSpawnCav, kSpawnBackground, kCoordEntry, kPass, kArrive };

struct Event {
  double t;
  long long seq;
  EventType type;
  int index;  // vehicle id, or source index for spawns

  bool operator>(const Event& o) const { return std::tie(t, seq) > std::tie(o.t, o.seq); }
};

struct VehicleState {
  EdgeId edge = -1;
  EdgeId next_edge = -1;
  double last_decision = 0.0;   // coordination entry at the previous vertex (spawn at the origin)
  int head = -1;                // platoon head on the current edge
  int pending_head = -1;        // head to follow on the next edge
  std::vector<EdgeId> static_route;  // remaining static route (edges); front is the next edge
  // value-approx outcome awaiting the next vertex
  VertexId va_vertex = -1;
  double va_h = 0.0;
  MergeAction va_action = MergeAction::kNoMerge;
  double va_cost = 0.0;
};

struct Controller {
  HeadwayHistory history;
  bool has_arrival = false;
  double last_arrival = 0.0;
  bool has_prev = false;
  int prev_vehicle = -1;
  double prev_pass = 0.0;
  VertexId prev_dest = -1;
  EdgeId prev_edge = -1;
  std::vector<VertexId> prev_static_path;  // prev vehicle's static path from this vertex
  std::optional<PolyCostModel> model;

  Controller(double psi, int m) : history(psi, m) {}
};

struct EdgeAccumulator {
  int full = 0;     // non-follower vehicles
  int follow = 0;   // platoon followers
  double last_change = 0.0;
};

struct BinAccumulator {
  int entries = 0;
  int cav_entries = 0;
  double speed_sum = 0.0;
  double occupancy_integral = 0.0;  // weighted vehicle-seconds
};

struct ThresholdKey {
  long long lambda_q;
  long long d_q;
  long long d1_q;
  bool operator<(const ThresholdKey& o) const {
    return std::tie(lambda_q, d_q, d1_q) < std::tie(o.lambda_q, o.d_q, o.d1_q);
  }
};

struct Decision {
  EdgeId next = -1;
  bool merge = false;
  double u = 0.0;          // non-merge time reduction when merge is false
  double fallback = 0.0;   // action when a merge turns out infeasible
  bool record = false;
  double lambda_hat = 0.0, theta = kNaN, c = kNaN;
};

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg)
      : cfg_(cfg),
        net_(build_network(cfg)),
        w_(cfg.costs.weights()),
        fm_(cfg.costs.fuel()),
        gs_(cfg.greenshield()),
        v0_(cfg.v0()),
        omega_(cfg.platoon.omega()),
        free_w_(free_flow_times(net_, v0_)),
        table_(init_tables(net_, v0_, cfg.policy.chi)) {
    for (const auto& a : cfg.sim.availability)
      net_.set_edge_availability(index_of(a.edge), a.available, a.t);
    for (VertexId v = 0; v < net_.num_vertices(); ++v) {
      controllers_.emplace_back(cfg.policy.psi, cfg.policy.M);
      if (cfg.policy.kind == PolicyKind::kValueApprox)
        controllers_.back().model.emplace(cfg.policy.degree_n, cfg.policy.window_l,
                                          cfg.policy.window_y);
    }
    occupancy_.resize(static_cast<size_t>(net_.num_edges()));
    n_bins_ = std::max(1, static_cast<int>(std::ceil(cfg.sim.max_time_s / cfg.sim.bin_s)));
    bins_.assign(static_cast<size_t>(n_bins_) * net_.num_edges(), {});
  }

  MetricsReport run();

 private:
  void schedule(double t, EventType type, int index) { queue_.push({t, seq_++, type, index}); }

  // Dispatch
  void coord_entry(int id, double t);
  void pass(int id, double t);
  void arrive(int id, double t);

  int new_vehicle(VehicleClass cls, VertexId o, VertexId d, double t);
  void enter_edge(int id, EdgeId e, double t, int head);
  void leave_edge(int id, double t);
  void add_cost(int id, double dt, double v, bool follower);
  void occupancy_change(EdgeId e, double t, int dfull, int dfollow);

  std::vector<EdgeId> static_path(VertexId from, VertexId to, double t);
  EdgeId static_next(int id, VertexId at, double t);
  Decision decide(int id, VertexId i, double t, double d1, std::optional<double> h_raw);
  std::pair<double, double> threshold_for(double lambda_hat, double d_hat, double d1);
  double ff_distance(const std::vector<EdgeId>& edges, size_t from) const;
  void record_value_outcome(int id, VertexId reached, double h_next);

  const ScenarioConfig& cfg_;
  RoadNetwork net_;
  CostWeights w_;
  FuelModel fm_;
  GreenshieldModel gs_;
  double v0_;
  double omega_;
  std::vector<double> free_w_;
  TravelTimeTable table_;
  std::vector<Controller> controllers_;
  std::vector<EdgeAccumulator> occupancy_;
  int n_bins_ = 1;
  std::vector<BinAccumulator> bins_;
  std::map<ThresholdKey, std::pair<double, double>> threshold_cache_;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  long long seq_ = 0;

  std::vector<double> cav_last_spawn_;
  std::vector<ArrivalStream> bg_streams_;
  std::vector<int> od_of_bg_;

  std::vector<VehicleState> state_;
  MetricsReport report_;
};

int Simulation::new_vehicle(VehicleClass cls, VertexId o, VertexId d, double t) {
  TripRecord tr;
  tr.id = static_cast<int>(report_.trips.size());
  tr.cls = cls;
  tr.origin = o;
  tr.destination = d;
  tr.spawn = t;
  tr.arrive = kNaN;
  report_.trips.push_back(tr);
  state_.emplace_back();
  state_.back().last_decision = t;
  return tr.id;
}

std::vector<EdgeId> Simulation::static_path(VertexId from, VertexId to, double t) {
  auto p = shortest_path(net_, from, to, free_w_, t);
  if (!p) throw NoRouteError("no available route from vertex " + std::to_string(label_of(from)) +
                             " to " + std::to_string(label_of(to)));
  return p->edges;
}

// Next edge of the vehicle's static route, recomputed if it is unavailable at t.
EdgeId Simulation::static_next(int id, VertexId at, double t) {
  VehicleState& s = state_[id];
  if (s.static_route.empty() || net_.edge(s.static_route.front()).from != at ||
      !net_.is_available(s.static_route.front(), t)) {
    if (!s.static_route.empty()) ++report_.counters.reroutes;
    s.static_route = static_path(at, report_.trips[id].destination, t);
  }
  return s.static_route.front();
}

double Simulation::ff_distance(const std::vector<EdgeId>& edges, size_t from) const {
  double d = 0.0;
  for (size_t k = from; k < edges.size(); ++k) d += net_.edge(edges[k]).length;
  return d;
}

void Simulation::occupancy_change(EdgeId e, double t, int dfull, int dfollow) {
  EdgeAccumulator& acc = occupancy_[e];
  const double weight = acc.full + omega_ * acc.follow;
  // Spread the weighted occupancy since the last change over the bins it spans.
  double a = acc.last_change;
  const double end = std::min(t, n_bins_ * cfg_.sim.bin_s);
  while (weight > 0 && a < end) {
    const int b = static_cast<int>(a / cfg_.sim.bin_s);
    const double bin_end = std::min(end, (b + 1) * cfg_.sim.bin_s);
    bins_[static_cast<size_t>(b) * net_.num_edges() + e].occupancy_integral += weight * (bin_end - a);
    a = bin_end;
  }
  acc.last_change = t;
  acc.full += dfull;
  acc.follow += dfollow;
}

void Simulation::add_cost(int id, double dt, double v, bool follower) {
  const SegmentCost sc = trip_segment_cost(dt, v, follower, fm_, w_);
  TripRecord& tr = report_.trips[id];
  EdgeRecord& rec = tr.edges.back();
  rec.cost += sc.cost;
  rec.fuel += sc.fuel;
  tr.cost += sc.cost;
  tr.fuel += sc.fuel;
  if (state_[id].va_vertex >= 0) state_[id].va_cost += sc.cost;
}

void Simulation::enter_edge(int id, EdgeId e, double t, int head) {
  if (!net_.is_available(e, t)) throw Error("internal: entry onto an unavailable edge");
  const Edge& edge = net_.edge(e);
  TripRecord& tr = report_.trips[id];
  VehicleState& s = state_[id];

  bool follower = false;
  double v_cruise = 0.0;
  if (head >= 0 && state_[head].edge == e && report_.trips[head].edges.back().enter == t) {
    follower = true;
    v_cruise = report_.trips[head].edges.back().v_cruise;
  } else {
    const EdgeAccumulator& acc = occupancy_[e];
    const double k = (acc.full + omega_ * acc.follow) / (edge.length * edge.lanes);
    v_cruise = std::clamp(equilibrium_speed(k, gs_), cfg_.sim.v_floor, v0_);
    head = -1;
  }
  s.edge = e;
  s.head = head;
  s.next_edge = -1;
  occupancy_change(e, t, follower ? 0 : 1, follower ? 1 : 0);

  EdgeRecord rec;
  rec.edge = e;
  rec.enter = t;
  rec.v_cruise = v_cruise;
  rec.follower = follower;
  tr.edges.push_back(rec);

  const int b = static_cast<int>(t / cfg_.sim.bin_s);
  if (b < n_bins_) {
    BinAccumulator& bin = bins_[static_cast<size_t>(b) * net_.num_edges() + e];
    ++bin.entries;
    if (tr.cls == VehicleClass::kCav) ++bin.cav_entries;
    bin.speed_sum += v_cruise;
  }

  const double dt = edge.d2 / v_cruise;
  add_cost(id, dt, v_cruise, follower);
  const double t_zone = t + dt;
  if (tr.cls == VehicleClass::kCav) {
    schedule(t_zone, EventType::kCoordEntry, id);
  } else {
    tr.edges.back().coord_entry = t_zone;
    const double dt1 = edge.d1 / v0_;
    tr.edges.back().v_coord = v0_;
    add_cost(id, dt1, v0_, false);
    schedule(t_zone + dt1, net_.is_destination(edge.to) && edge.to == tr.destination
                               ? EventType::kArrive
                               : EventType::kPass,
             id);
  }
}

void Simulation::leave_edge(int id, double t) {
  VehicleState& s = state_[id];
  EdgeRecord& rec = report_.trips[id].edges.back();
  rec.exit = t;
  occupancy_change(s.edge, t, rec.follower ? 0 : -1, rec.follower ? -1 : 0);
}

std::pair<double, double> Simulation::threshold_for(double lambda_hat, double d_hat, double d1) {
  const ThresholdKey key{std::max(1LL, std::llround(lambda_hat / 1e-4)), std::llround(d_hat / 100.0),
                         std::llround(d1)};
  auto it = threshold_cache_.find(key);
  if (it != threshold_cache_.end()) {
    ++report_.counters.cache_hits;
    return it->second;
  }
  ++report_.counters.cache_misses;
  PolicyParams p;
  p.w = w_;
  p.fm = fm_;
  p.d1 = d1;
  p.d2 = key.d_q * 100.0;
  p.v0 = v0_;
  p.gamma = cfg_.policy.gamma;
  p.lambda = key.lambda_q * 1e-4;
  std::pair<double, double> out{-kInf, 0.0};
  try {
    const ThresholdSolution s = solve_threshold(p);
    out = {s.theta, s.c};
  } catch (const Error&) {
    ++report_.counters.solver_failures;
  }
  threshold_cache_.emplace(key, out);
  return out;
}

Decision Simulation::decide(int id, VertexId i, double t, double d1,
                            std::optional<double> h_raw) {
  const TripRecord& tr = report_.trips[id];
  Controller& ctl = controllers_[i];
  Decision dec;
  const double zone_time = d1 / v0_;
  const double u_min = -zone_time;
  const double u_cap = zone_time - d1 / (cfg_.sim.speed_cap * v0_);
  auto clamp_c = [&](double c) { return std::clamp(c, u_min, u_cap); };
  const double h = h_raw ? std::max(0.0, *h_raw) : 0.0;
  const double lambda_hat = estimate_arrival_rate(ctl.history);

  switch (cfg_.policy.kind) {
    case PolicyKind::kBaseline: {
      dec.next = static_next(id, i, t);
      return dec;
    }
    case PolicyKind::kValueApprox: {
      dec.next = static_next(id, i, t);
      if (!h_raw) return dec;
      const MergeAction a = ctl.model->decide(h);
      dec.merge = a == MergeAction::kMerge;
      VehicleState& s = state_[id];
      s.va_vertex = i;
      s.va_h = h;
      s.va_action = a;
      s.va_cost = 0.0;
      return dec;
    }
    case PolicyKind::kPolicyA: {
      dec.next = static_next(id, i, t);
      const auto& route = state_[id].static_route;
      double common = 0.0;
      if (h_raw && ctl.prev_dest >= 0) {
        // Shared prefix of the two static routes from this vertex.
        std::vector<VertexId> mine{i};
        for (EdgeId e : route) mine.push_back(net_.edge(e).to);
        const VertexId split = split_vertex(mine, ctl.prev_static_path);
        for (EdgeId e : route) {
          if (net_.edge(e).from == split) break;
          common += net_.edge(e).length;
        }
      }
      const auto [theta, c] = threshold_for(lambda_hat, common, d1);
      (void)c;
      dec.record = true;
      dec.lambda_hat = lambda_hat;
      dec.theta = theta;
      dec.c = 0.0;
      dec.merge = h_raw.has_value() && h <= theta;
      return dec;
    }
    case PolicyKind::kThresholdNetwork: {
      const VertexId dest = tr.destination;
      const int d = net_.destination_index(dest);
      try {
        dec.next = best_neighbor(net_, table_, i, dest, t).edge;
      } catch (const NoRouteError&) {
        ++report_.counters.no_route_fallback;
        dec.next = static_path(i, dest, t).front();
      }
      Path mine;
      try {
        mine = predict_path_via(net_, table_, dec.next, dest, t);
      } catch (const NoRouteError&) {
        ++report_.counters.no_route_fallback;
        mine.vertices = {i};
        mine.edges.clear();
        for (EdgeId e : static_path(i, dest, t)) {
          mine.edges.push_back(e);
          mine.vertices.push_back(net_.edge(e).to);
        }
      }
      const double t_i = table_.value(dec.next, d);
      auto vbar = [&](double dist, double tt) {
        return tt > 0 ? std::clamp(dist / tt, 1.0, v0_) : v0_;
      };
      const double vbar_i = vbar(ff_distance(mine.edges, 0), t_i);

      VertexId split = i;
      if (h_raw && ctl.prev_edge >= 0) {
        try {
          const Path prev = predict_path_via(net_, table_, ctl.prev_edge, ctl.prev_dest, t);
          split = split_vertex(mine.vertices, prev.vertices);
        } catch (const NoRouteError&) {
          split = i;
        }
      }
      double d_hat = 0.0;
      if (split == i) {
        ++report_.counters.zero_common_path;
        d_hat = cruising_distance_single(std::isfinite(t_i) ? t_i : 0.0, vbar_i, fm_);
      } else {
        double t_s = 0.0, vbar_s = v0_;
        if (split != dest) {
          const auto pos = std::find(mine.vertices.begin(), mine.vertices.end(), split) -
                           mine.vertices.begin();
          const EdgeId e_s = mine.edges[static_cast<size_t>(pos)];
          t_s = table_.value(e_s, d);
          vbar_s = vbar(ff_distance(mine.edges, static_cast<size_t>(pos)), t_s);
        }
        const CruisingEstimate ce = cruising_distance_common(t_i, t_s, vbar_i, vbar_s, fm_);
        if (ce.clamped) ++report_.counters.distance_clamped;
        d_hat = ce.distance;
      }
      const auto [theta, c] = threshold_for(lambda_hat, d_hat, d1);
      dec.record = true;
      dec.lambda_hat = lambda_hat;
      dec.theta = theta;
      dec.c = clamp_c(c);
      dec.u = dec.c;
      dec.fallback = dec.c;
      dec.merge = split != i && h_raw.has_value() && h <= theta;
      return dec;
    }
  }
  return dec;
}

void Simulation::record_value_outcome(int id, VertexId reached, double h_next) {
  VehicleState& s = state_[id];
  if (s.va_vertex < 0) return;
  const VertexId at = s.va_vertex;
  s.va_vertex = -1;
  double downstream = 0.0;
  if (!(net_.is_destination(reached) && reached == report_.trips[id].destination)) {
    const auto best = controllers_[reached].model->best_estimate(h_next);
    if (!best) return;
    downstream = *best;
  }
  controllers_[at].model->record_outcome(s.va_h, s.va_action, s.va_cost + downstream);
}

void Simulation::coord_entry(int id, double t) {
  TripRecord& tr = report_.trips[id];
  VehicleState& s = state_[id];
  const Edge& edge = net_.edge(s.edge);
  const VertexId i = edge.to;
  tr.edges.back().coord_entry = t;
  const double d1 = edge.d1;
  const double zone_time = d1 / v0_;

  if (i == tr.destination) {
    tr.edges.back().v_coord = v0_;
    add_cost(id, zone_time, v0_, false);
    schedule(t + zone_time, EventType::kArrive, id);
    return;
  }

  const int d = net_.destination_index(tr.destination);
  table_.update(s.edge, d, t - s.last_decision, table_.downstream_min(net_, i, d, t));
  s.last_decision = t;

  Controller& ctl = controllers_[i];
  const double x = ctl.has_arrival ? t - ctl.last_arrival : t;
  const double detector = std::max(x, cfg_.platoon.h0);
  ctl.history.push(detector);
  ctl.has_arrival = true;
  ctl.last_arrival = t;
  report_.arrivals.push_back({t, i, detector});

  std::optional<double> h_raw;
  if (ctl.has_prev) {
    h_raw = t + zone_time - ctl.prev_pass;
    if (*h_raw < 0) ++report_.counters.headway_clamped;
  }

  if (cfg_.policy.kind == PolicyKind::kValueApprox)
    record_value_outcome(id, i, h_raw ? std::max(0.0, *h_raw) : 0.0);

  Decision dec = decide(id, i, t, d1, h_raw);
  if (dec.record) report_.policy.push_back({t, i, dec.lambda_hat, dec.theta, dec.c});

  double u = dec.u;
  bool merged = false;
  if (dec.merge) {
    const double target = *h_raw;
    const double remaining = zone_time - target;
    const bool feasible = target >= -zone_time && remaining > 0 &&
                          d1 / remaining <= cfg_.sim.speed_cap * v0_;
    if (feasible) {
      merged = true;
      u = target;
    } else {
      ++report_.counters.merge_infeasible;
      ++tr.merge_infeasible;
      u = dec.fallback;
      if (cfg_.policy.kind == PolicyKind::kValueApprox) s.va_action = MergeAction::kNoMerge;
    }
  }

  const double t_pass = merged ? ctl.prev_pass : t + zone_time - u;
  s.pending_head = -1;
  if (merged) {
    ++report_.counters.merges;
    ++tr.merges;
    tr.edges.back().merged_with = ctl.prev_vehicle;
    if (ctl.prev_edge == dec.next) {
      const int prev = ctl.prev_vehicle;
      s.pending_head = state_[prev].pending_head >= 0 ? state_[prev].pending_head : prev;
    }
  }
  s.next_edge = dec.next;
  tr.edges.back().u = u;
  tr.edges.back().v_coord = d1 / (t_pass - t);
  add_cost(id, t_pass - t, d1 / (t_pass - t), false);

  ctl.has_prev = true;
  ctl.prev_vehicle = id;
  ctl.prev_pass = t_pass;
  ctl.prev_dest = tr.destination;
  ctl.prev_edge = dec.next;
  if (cfg_.policy.kind == PolicyKind::kPolicyA) {
    ctl.prev_static_path = {i};
    for (EdgeId e : s.static_route) ctl.prev_static_path.push_back(net_.edge(e).to);
  }
  schedule(t_pass, EventType::kPass, id);
}

void Simulation::pass(int id, double t) {
  TripRecord& tr = report_.trips[id];
  VehicleState& s = state_[id];
  const VertexId i = net_.edge(s.edge).to;
  leave_edge(id, t);

  EdgeId next = -1;
  int head = -1;
  if (tr.cls == VehicleClass::kCav) {
    next = s.next_edge;
    head = s.pending_head;
    if (!net_.is_available(next, t)) {
      ++report_.counters.reroutes;
      head = -1;
      if (cfg_.policy.kind == PolicyKind::kThresholdNetwork) {
        try {
          next = best_neighbor(net_, table_, i, tr.destination, t).edge;
        } catch (const NoRouteError&) {
          ++report_.counters.no_route_fallback;
          next = static_path(i, tr.destination, t).front();
        }
      } else {
        s.static_route = static_path(i, tr.destination, t);
        next = s.static_route.front();
      }
    }
  } else {
    next = static_next(id, i, t);
  }
  if (!s.static_route.empty() && s.static_route.front() == next)
    s.static_route.erase(s.static_route.begin());
  enter_edge(id, next, t, head);
}

void Simulation::arrive(int id, double t) {
  TripRecord& tr = report_.trips[id];
  VehicleState& s = state_[id];
  leave_edge(id, t);
  tr.arrive = t;
  tr.finished = true;
  tr.time = t - tr.spawn;
  if (tr.cls == VehicleClass::kCav) {
    const int d = net_.destination_index(tr.destination);
    table_.update(s.edge, d, t - s.last_decision, 0.0);
    if (cfg_.policy.kind == PolicyKind::kValueApprox)
      record_value_outcome(id, tr.destination, 0.0);
  }
  s.edge = -1;
}

MetricsReport Simulation::run() {
  Summary& sum = report_.summary;
  sum.scenario = cfg_.name;
  sum.policy = cfg_.policy.kind;
  sum.seed = cfg_.sim.seed;

  // CAV spawn times are drawn up front so that background demand can stop
  // with the last CAV of its O-D pair.
  std::vector<std::vector<double>> cav_times(cfg_.demand.od.size());
  for (size_t j = 0; j < cfg_.demand.od.size(); ++j) {
    const OdDemand& od = cfg_.demand.od[j];
    PoissonSource src{od.rate_veh_per_hr / 3600.0, index_of(od.origin), index_of(od.destination),
                      od.n_cavs, 2 * j};
    ArrivalStream stream(src, cfg_.sim.seed);
    while (auto t = stream.next()) cav_times[j].push_back(*t);
    for (size_t k = 0; k < cav_times[j].size(); ++k)
      schedule(cav_times[j][k], EventType::kSpawnCav, static_cast<int>(j));
    if (cfg_.demand.penetration < 1.0 && !cav_times[j].empty()) {
      const double zeta = cfg_.demand.penetration;
      PoissonSource bg{src.rate * (1.0 - zeta) / zeta, src.origin, src.destination, std::nullopt,
                       2 * j + 1};
      bg_streams_.emplace_back(bg, cfg_.sim.seed);
      od_of_bg_.push_back(static_cast<int>(j));
      cav_last_spawn_.push_back(cav_times[j].back());
      const double t0 = *bg_streams_.back().next();
      if (t0 <= cav_last_spawn_.back())
        schedule(t0, EventType::kSpawnBackground, static_cast<int>(bg_streams_.size() - 1));
    }
  }

  const double max_time = cfg_.sim.max_time_s;
  const long long event_budget =
      200LL * (1 + static_cast<long long>(net_.num_edges())) * 1000000LL;
  double now = 0.0;
  while (!queue_.empty()) {
    const Event ev = queue_.top();
    if (ev.t > max_time) break;
    queue_.pop();
    now = ev.t;
    if (++report_.counters.events > event_budget) {
      sum.aborted = true;
      sum.abort_reason = "event budget exhausted (gridlock watchdog)";
      break;
    }
    switch (ev.type) {
      case EventType::kSpawnCav: {
        const OdDemand& od = cfg_.demand.od[ev.index];
        const int id = new_vehicle(VehicleClass::kCav, index_of(od.origin),
                                   index_of(od.destination), ev.t);
        VertexId o = index_of(od.origin);
        EdgeId first;
        if (cfg_.policy.kind == PolicyKind::kThresholdNetwork) {
          try {
            first = best_neighbor(net_, table_, o, index_of(od.destination), ev.t).edge;
          } catch (const NoRouteError&) {
            ++report_.counters.no_route_fallback;
            first = static_path(o, index_of(od.destination), ev.t).front();
          }
        } else {
          state_[id].static_route = static_path(o, index_of(od.destination), ev.t);
          first = state_[id].static_route.front();
          state_[id].static_route.erase(state_[id].static_route.begin());
        }
        enter_edge(id, first, ev.t, -1);
        break;
      }
      case EventType::kSpawnBackground: {
        const int j = od_of_bg_[ev.index];
        const OdDemand& od = cfg_.demand.od[j];
        const int id = new_vehicle(VehicleClass::kBackground, index_of(od.origin),
                                   index_of(od.destination), ev.t);
        state_[id].static_route = static_path(index_of(od.origin), index_of(od.destination), ev.t);
        const EdgeId first = state_[id].static_route.front();
        state_[id].static_route.erase(state_[id].static_route.begin());
        enter_edge(id, first, ev.t, -1);
        const double tn = *bg_streams_[ev.index].next();
        if (tn <= cav_last_spawn_[ev.index]) schedule(tn, EventType::kSpawnBackground, ev.index);
        break;
      }
      case EventType::kCoordEntry: coord_entry(ev.index, ev.t); break;
      case EventType::kPass: pass(ev.index, ev.t); break;
      case EventType::kArrive: arrive(ev.index, ev.t); break;
    }
  }

  // Close occupancy integrals at the end of the horizon.
  const double horizon = n_bins_ * cfg_.sim.bin_s;
  for (EdgeId e = 0; e < net_.num_edges(); ++e) occupancy_change(e, horizon, 0, 0);

  sum.end_time = now;
  double cost = 0.0, time = 0.0, fuel = 0.0;
  for (const TripRecord& tr : report_.trips) {
    if (tr.cls == VehicleClass::kCav) {
      ++sum.n_cav;
      if (tr.finished) {
        ++sum.cav_finished;
        cost += tr.cost;
        time += tr.time;
        fuel += tr.fuel;
      }
    } else {
      ++sum.n_background;
      if (tr.finished) ++sum.background_finished;
    }
  }
  if (sum.cav_finished > 0) {
    sum.mean_cav_cost = cost / sum.cav_finished;
    sum.mean_cav_time = time / sum.cav_finished;
    sum.mean_cav_fuel = fuel / sum.cav_finished;
  }
  if (!sum.aborted && (sum.cav_finished < sum.n_cav || sum.background_finished < sum.n_background)) {
    sum.aborted = true;
    sum.abort_reason = "max_time reached with vehicles in flight";
  }

  for (int b = 0; b < n_bins_; ++b)
    for (EdgeId e = 0; e < net_.num_edges(); ++e) {
      const BinAccumulator& acc = bins_[static_cast<size_t>(b) * net_.num_edges() + e];
      EdgeBin row;
      row.bin_start = b * cfg_.sim.bin_s;
      row.edge = e;
      row.entries = acc.entries;
      row.cav_entries = acc.cav_entries;
      row.mean_speed = acc.entries > 0 ? acc.speed_sum / acc.entries : v0_;
      row.density = acc.occupancy_integral / (cfg_.sim.bin_s * net_.edge(e).length);
      row.flow = acc.entries / cfg_.sim.bin_s;
      report_.edge_bins.push_back(row);
    }
  return std::move(report_);
}

}  // namespace

MetricsReport run_simulation(const ScenarioConfig& cfg) {
  cfg.validate();
  Simulation sim(cfg);
  return sim.run();
}

}  // namespace platoon
