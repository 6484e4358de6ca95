#include "platoon/routing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "platoon/error.hpp"

namespace platoon {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TravelTimeTable::TravelTimeTable(const RoadNetwork& net, double chi)
    : chi_(chi),
      num_edges_(net.num_edges()),
      num_dest_(static_cast<int>(net.destinations().size())),
      t_(static_cast<size_t>(num_edges_) * num_dest_, kInf) {
  if (!(chi >= 0 && chi <= 1)) throw std::invalid_argument("chi must lie in [0,1]");
}

size_t TravelTimeTable::index(EdgeId e, int dest) const {
  if (e < 0 || e >= num_edges_ || dest < 0 || dest >= num_dest_)
    throw Error("travel-time table: unknown entry");
  return static_cast<size_t>(e) * num_dest_ + dest;
}

double TravelTimeTable::value(EdgeId e, int dest) const { return t_[index(e, dest)]; }

double TravelTimeTable::query(const RoadNetwork& net, EdgeId e, int dest, double t) const {
  const double v = value(e, dest);
  return net.is_available(e, t) ? v : kInf;
}

void TravelTimeTable::set(EdgeId e, int dest, double v) { t_[index(e, dest)] = v; }

void TravelTimeTable::update(EdgeId e, int dest, double realized, double downstream_min) {
  double& cur = t_[index(e, dest)];
  if (!(realized >= 0)) throw Error("travel-time update: negative realised time");
  const double target = realized + downstream_min;
  if (chi_ == 0.0) return;
  if (!std::isfinite(target) || !std::isfinite(cur)) {
    cur = target;
    return;
  }
  cur += chi_ * (target - cur);
}

double TravelTimeTable::downstream_min(const RoadNetwork& net, VertexId v, int dest,
                                       double t) const {
  if (net.destinations().at(static_cast<size_t>(dest)) == v) return 0.0;
  double best = kInf;
  for (EdgeId e : net.vertex(v).out_edges) best = std::min(best, query(net, e, dest, t));
  return best;
}

TravelTimeTable init_tables(const RoadNetwork& net, double v0, double chi) {
  TravelTimeTable table(net, chi);
  const auto w = free_flow_times(net, v0);
  const auto& dests = net.destinations();
  for (int d = 0; d < static_cast<int>(dests.size()); ++d) {
    // Ignore availability: initial values describe the intact network.
    const auto dist = distances_to(net, dests[d], w, -kInf);
    for (const Edge& e : net.edges()) table.set(e.id, d, w[e.id] + dist[e.to]);
  }
  return table;
}

NeighborChoice best_neighbor(const RoadNetwork& net, const TravelTimeTable& table, VertexId i,
                             VertexId dest, double t) {
  const int d = net.destination_index(dest);
  if (d < 0) throw NoRouteError("best_neighbor: not a destination");
  NeighborChoice best{-1, -1, kInf};
  for (EdgeId e : net.vertex(i).out_edges) {
    const double v = table.query(net, e, d, t);
    if (!std::isfinite(v)) continue;
    const VertexId j = net.edge(e).to;
    if (best.edge < 0 || v < best.value || (v == best.value && j < best.next)) best = {e, j, v};
  }
  if (best.edge < 0) throw NoRouteError("best_neighbor: no available neighbour");
  return best;
}

namespace {

Path extend_greedy(const RoadNetwork& net, const TravelTimeTable& table, Path p, VertexId dest,
                   double t) {
  const auto limit = static_cast<size_t>(net.num_vertices());
  while (p.vertices.back() != dest) {
    if (p.edges.size() >= limit) throw NoRouteError("predict_path: cycle");
    const auto c = best_neighbor(net, table, p.vertices.back(), dest, t);
    p.edges.push_back(c.edge);
    p.vertices.push_back(c.next);
  }
  return p;
}

}  // namespace

Path predict_path(const RoadNetwork& net, const TravelTimeTable& table, VertexId i, VertexId dest,
                  double t) {
  Path p;
  p.vertices.push_back(i);
  p.cost = 0.0;
  if (i != dest) p.cost = best_neighbor(net, table, i, dest, t).value;
  return extend_greedy(net, table, std::move(p), dest, t);
}

Path predict_path_via(const RoadNetwork& net, const TravelTimeTable& table, EdgeId first,
                      VertexId dest, double t) {
  const Edge& e = net.edge(first);
  const int d = net.destination_index(dest);
  if (d < 0) throw NoRouteError("predict_path_via: not a destination");
  Path p;
  p.vertices = {e.from, e.to};
  p.edges = {first};
  p.cost = table.value(first, d);
  return extend_greedy(net, table, std::move(p), dest, t);
}

VertexId split_vertex(const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
  if (a.empty() || b.empty() || a.front() != b.front())
    throw Error("split_vertex: paths must share their first vertex");
  size_t k = 0;
  while (k + 1 < a.size() && k + 1 < b.size() && a[k + 1] == b[k + 1]) ++k;
  return a[k];
}

double cruising_distance_single(double t, double vbar, const FuelModel& fm) {
  if (!(t >= 0)) throw std::invalid_argument("cruising distance: negative time");
  return fuel_rate(vbar, fm) * t / fm.phi;
}

CruisingEstimate cruising_distance_common(double t_i, double t_s, double vbar_i, double vbar_s,
                                          const FuelModel& fm) {
  const double raw = (fuel_rate(vbar_i, fm) * t_i - fuel_rate(vbar_s, fm) * t_s) / fm.phi;
  if (raw < 0) return {0.0, true};
  return {raw, false};
}

}  // namespace platoon
