#pragma once

#include <vector>

#include "platoon/dynamics.hpp"
#include "platoon/network.hpp"

namespace platoon {

// Travel-time estimates T_i(d, j) stored per out-edge (i, j) and destination d.
class TravelTimeTable {
 public:
  TravelTimeTable() = default;
  TravelTimeTable(const RoadNetwork& net, double chi);

  double chi() const { return chi_; }
  int num_destinations() const { return num_dest_; }

  // Raw stored estimate for the edge i -> j towards destination index dest.
  double value(EdgeId e, int dest) const;
  // As value(), but +infinity when the edge is unavailable at t.
  double query(const RoadNetwork& net, EdgeId e, int dest, double t) const;
  void set(EdgeId e, int dest, double v);

  // T <- T + chi (U + downstream_min - T). Throws Error for an unknown entry
  // or negative U. An infinite target leaves an infinite entry; an infinite
  // entry is replaced by a finite target.
  void update(EdgeId e, int dest, double realized, double downstream_min);

  // min over available out-edges of vertex v; 0 when v is the destination.
  double downstream_min(const RoadNetwork& net, VertexId v, int dest, double t) const;

 private:
  size_t index(EdgeId e, int dest) const;

  double chi_ = 1.0;
  int num_edges_ = 0;
  int num_dest_ = 0;
  std::vector<double> t_;
};

// Free-flow initialisation: length/v0 plus the free-flow time from the head
// of the edge to d (+infinity when unreachable).
TravelTimeTable init_tables(const RoadNetwork& net, double v0, double chi = 1.0);

struct NeighborChoice {
  EdgeId edge = 0;
  VertexId next = 0;
  double value = 0.0;
};

// Out-edge of i with minimal T towards dest among edges available at t; ties
// go to the lowest neighbour index. Throws NoRouteError when none is finite.
NeighborChoice best_neighbor(const RoadNetwork& net, const TravelTimeTable& table, VertexId i,
                             VertexId dest, double t);

// Greedy best_neighbor chain from i to dest. Throws NoRouteError on a dead end
// or after |V| hops.
Path predict_path(const RoadNetwork& net, const TravelTimeTable& table, VertexId i, VertexId dest,
                  double t);

// Same chain, but the first hop is forced through `first`.
Path predict_path_via(const RoadNetwork& net, const TravelTimeTable& table, EdgeId first,
                      VertexId dest, double t);

// Last vertex of the longest common prefix. Throws Error when the paths start
// at different vertices or either is empty.
VertexId split_vertex(const std::vector<VertexId>& a, const std::vector<VertexId>& b);

// r(vbar) T / phi.
double cruising_distance_single(double t, double vbar, const FuelModel& fm);

struct CruisingEstimate {
  double distance = 0.0;  // m
  bool clamped = false;   // a negative raw value was clamped to 0
};

// (r(vbar_i) T_i - r(vbar_s) T_s) / phi, clamped at 0.
CruisingEstimate cruising_distance_common(double t_i, double t_s, double vbar_i, double vbar_s,
                                          const FuelModel& fm);

}  // namespace platoon
