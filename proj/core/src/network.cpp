#include "platoon/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>

#include "platoon/error.hpp"

namespace platoon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool reachable(const RoadNetwork& net, VertexId from, VertexId to) {
  std::vector<char> seen(static_cast<size_t>(net.num_vertices()), 0);
  std::vector<VertexId> stack{from};
  seen[static_cast<size_t>(from)] = 1;
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    for (EdgeId e : net.vertex(v).out_edges) {
      if (!net.is_available(e, 0.0)) continue;
      const VertexId w = net.edge(e).to;
      if (!seen[static_cast<size_t>(w)]) {
        seen[static_cast<size_t>(w)] = 1;
        stack.push_back(w);
      }
    }
  }
  return false;
}

bool near_equal(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

RoadNetwork RoadNetwork::from_arcs(std::span<const Arc> arcs, std::span<const int> origin_labels,
                                   std::span<const int> destination_labels) {
  int max_label = 0;
  for (const Arc& a : arcs) max_label = std::max({max_label, a.from, a.to});
  for (int o : origin_labels) max_label = std::max(max_label, o);
  for (int d : destination_labels) max_label = std::max(max_label, d);
  if (arcs.empty()) throw GeometryError("network has no arcs");

  RoadNetwork net;
  net.vertices_.resize(static_cast<size_t>(max_label));
  for (int v = 0; v < max_label; ++v) net.vertices_[static_cast<size_t>(v)].id = v;

  for (const Arc& a : arcs) {
    const EdgeId id = static_cast<EdgeId>(net.edges_.size());
    const std::string where = "arc " + std::to_string(id + 1) + " (" + std::to_string(a.from) +
                              "," + std::to_string(a.to) + ")";
    if (a.from < 1 || a.to < 1) throw GeometryError(where + ": vertex labels start at 1");
    if (a.from == a.to) throw GeometryError(where + ": self-loop");
    if (!(a.d1 > 0.0) || !(a.d1 < a.length))
      throw GeometryError(where + ": coordinating zone must satisfy 0 < d1 < length");
    if (!(a.d1 < a.length - a.d1))
      throw GeometryError(where + ": coordinating zone must be shorter than the cruising zone");
    if (a.lanes < 1) throw GeometryError(where + ": lanes must be >= 1");
    Edge e;
    e.id = id;
    e.from = index_of(a.from);
    e.to = index_of(a.to);
    e.length = a.length;
    e.d1 = a.d1;
    e.d2 = a.length - a.d1;
    e.lanes = a.lanes;
    net.vertices_[static_cast<size_t>(e.from)].out_edges.push_back(id);
    net.vertices_[static_cast<size_t>(e.to)].in_edges.push_back(id);
    net.edges_.push_back(std::move(e));
  }
  for (Vertex& v : net.vertices_) v.is_junction = v.in_edges.size() + v.out_edges.size() > 2;

  auto to_index = [&](std::span<const int> labels, const char* what) {
    std::vector<VertexId> out;
    for (int l : labels) {
      if (l < 1 || l > max_label) throw GeometryError(std::string(what) + " label out of range");
      const VertexId v = index_of(l);
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
  };
  net.origins_ = to_index(origin_labels, "origin");
  net.destinations_ = to_index(destination_labels, "destination");
  if (net.origins_.empty() || net.destinations_.empty())
    throw GeometryError("network needs at least one origin and one destination");

  for (VertexId o : net.origins_)
    for (VertexId d : net.destinations_)
      if (!reachable(net, o, d))
        throw GeometryError("destination " + std::to_string(label_of(d)) +
                            " is unreachable from origin " + std::to_string(label_of(o)));
  return net;
}

bool RoadNetwork::is_destination(VertexId v) const { return destination_index(v) >= 0; }

int RoadNetwork::destination_index(VertexId v) const {
  for (size_t i = 0; i < destinations_.size(); ++i)
    if (destinations_[i] == v) return static_cast<int>(i);
  return -1;
}

std::optional<EdgeId> RoadNetwork::find_edge(VertexId from, VertexId to) const {
  if (from < 0 || from >= num_vertices()) return std::nullopt;
  for (EdgeId e : vertices_[static_cast<size_t>(from)].out_edges)
    if (edges_[static_cast<size_t>(e)].to == to) return e;
  return std::nullopt;
}

void RoadNetwork::set_edge_availability(EdgeId e, bool available, double t) {
  if (e < 0 || e >= num_edges()) throw GeometryError("unknown edge " + std::to_string(e + 1));
  auto& timeline = edges_[static_cast<size_t>(e)].timeline;
  if (!timeline.empty() && t < timeline.back().t)
    throw GeometryError("availability changes must be appended in time order");
  timeline.push_back({t, available});
}

bool RoadNetwork::is_available(EdgeId e, double t) const {
  const auto& timeline = edge(e).timeline;
  bool state = true;
  for (const AvailabilityChange& c : timeline) {
    if (c.t > t) break;
    state = c.available;
  }
  return state;
}

std::vector<Arc> nguyen_dupuis_arcs(double edge_length, double d1, int lanes) {
  static constexpr std::pair<int, int> kArcs[] = {
      {1, 5},  {1, 12}, {4, 5},  {4, 9},   {5, 6},   {5, 9},   {6, 7},
      {6, 10}, {7, 8},  {7, 11}, {8, 2},   {9, 10},  {9, 13},  {10, 11},
      {11, 2}, {11, 3}, {12, 6}, {12, 8},  {13, 3}};
  std::vector<Arc> arcs;
  for (auto [from, to] : kArcs) arcs.push_back({from, to, edge_length, d1, lanes});
  return arcs;
}

RoadNetwork build_nguyen_dupuis(double edge_length, double d1, int lanes) {
  const auto arcs = nguyen_dupuis_arcs(edge_length, d1, lanes);
  const int origins[] = {1, 4};
  const int destinations[] = {2, 3};
  return RoadNetwork::from_arcs(arcs, origins, destinations);
}

RoadNetwork build_cascade(int n_junctions, double mainline_d2, double d1, int lanes) {
  if (n_junctions < 1) throw GeometryError("cascade needs at least one junction");
  const CascadeLayout lay{n_junctions};
  const double length = mainline_d2 + d1;
  std::vector<Arc> arcs;
  arcs.push_back({lay.mainline_origin(), lay.junction(1), length, d1, lanes});
  for (int i = 1; i <= n_junctions; ++i) {
    arcs.push_back({lay.ramp_origin(i), lay.junction(i), length, d1, lanes});
    const int next = i < n_junctions ? lay.junction(i + 1) : lay.destination();
    arcs.push_back({lay.junction(i), next, length, d1, lanes});
  }
  std::vector<int> origins{lay.mainline_origin()};
  for (int i = 1; i <= n_junctions; ++i) origins.push_back(lay.ramp_origin(i));
  const int destinations[] = {lay.destination()};
  return RoadNetwork::from_arcs(arcs, origins, destinations);
}

std::vector<double> distances_to(const RoadNetwork& net, VertexId destination,
                                 std::span<const double> edge_weights, double t) {
  std::vector<double> dist(static_cast<size_t>(net.num_vertices()), kInf);
  using Item = std::pair<double, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[static_cast<size_t>(destination)] = 0.0;
  queue.push({0.0, destination});
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[static_cast<size_t>(v)]) continue;
    for (EdgeId e : net.vertex(v).in_edges) {
      if (!net.is_available(e, t)) continue;
      const VertexId u = net.edge(e).from;
      const double nd = d + edge_weights[static_cast<size_t>(e)];
      if (nd < dist[static_cast<size_t>(u)]) {
        dist[static_cast<size_t>(u)] = nd;
        queue.push({nd, u});
      }
    }
  }
  return dist;
}

std::optional<Path> shortest_path(const RoadNetwork& net, VertexId origin, VertexId destination,
                                  std::span<const double> edge_weights, double t) {
  const auto dist = distances_to(net, destination, edge_weights, t);
  if (!std::isfinite(dist[static_cast<size_t>(origin)])) return std::nullopt;

  Path path;
  path.vertices.push_back(origin);
  VertexId v = origin;
  while (v != destination) {
    if (static_cast<int>(path.edges.size()) > net.num_vertices()) return std::nullopt;
    EdgeId best = -1;
    double best_cost = kInf;
    for (EdgeId e : net.vertex(v).out_edges) {
      if (!net.is_available(e, t)) continue;
      const Edge& edge = net.edge(e);
      const double c = edge_weights[static_cast<size_t>(e)] + dist[static_cast<size_t>(edge.to)];
      if (!std::isfinite(c)) continue;
      if (best < 0 || (c < best_cost && !near_equal(c, best_cost)) ||
          (near_equal(c, best_cost) && edge.to < net.edge(best).to)) {
        best = e;
        best_cost = std::min(c, best_cost);
      }
    }
    if (best < 0) return std::nullopt;
    path.edges.push_back(best);
    path.cost += edge_weights[static_cast<size_t>(best)];
    v = net.edge(best).to;
    path.vertices.push_back(v);
  }
  return path;
}

std::vector<double> free_flow_times(const RoadNetwork& net, double v0) {
  std::vector<double> w;
  w.reserve(net.edges().size());
  for (const Edge& e : net.edges()) w.push_back(e.length / v0);
  return w;
}

}  // namespace platoon
