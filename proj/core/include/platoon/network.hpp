#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace platoon {

// Vertices and edges are addressed by 0-based index everywhere in the library.
// Files and CSV output use 1-based labels (label = index + 1), which for the
// Nguyen-Dupuis network coincide with the customary vertex numbering and the
// arc-list edge numbering (edge 18 is the arc 12 -> 8).
using VertexId = int;
using EdgeId = int;

inline int label_of(int index) { return index + 1; }
inline int index_of(int label) { return label - 1; }

struct AvailabilityChange {
  double t = 0.0;
  bool available = true;
};

struct Edge {
  EdgeId id = 0;
  VertexId from = 0;
  VertexId to = 0;
  double length = 0.0;  // m
  double d1 = 0.0;      // coordinating zone before `to`, m
  double d2 = 0.0;      // cruising zone after `from`, m
  int lanes = 1;
  // Step timeline of availability changes, sorted by time (append-only).
  std::vector<AvailabilityChange> timeline;
};

struct Vertex {
  VertexId id = 0;
  bool is_junction = false;  // more than two incident edges
  std::vector<EdgeId> out_edges;
  std::vector<EdgeId> in_edges;
};

// One arc of a network description, using 1-based vertex labels.
struct Arc {
  int from = 0;
  int to = 0;
  double length = 0.0;
  double d1 = 0.0;
  int lanes = 1;
};

class RoadNetwork {
 public:
  // Builds and validates a network. Vertex count is the largest label used by
  // arcs, origins or destinations. Throws GeometryError on invalid input.
  static RoadNetwork from_arcs(std::span<const Arc> arcs, std::span<const int> origin_labels,
                               std::span<const int> destination_labels);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Vertex& vertex(VertexId v) const { return vertices_.at(static_cast<size_t>(v)); }
  const Edge& edge(EdgeId e) const { return edges_.at(static_cast<size_t>(e)); }
  const std::vector<VertexId>& origins() const { return origins_; }
  const std::vector<VertexId>& destinations() const { return destinations_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  bool is_destination(VertexId v) const;
  // Position of v in destinations(), or -1.
  int destination_index(VertexId v) const;
  std::optional<EdgeId> find_edge(VertexId from, VertexId to) const;

  // Appends to the edge's availability timeline. Changes must be appended in
  // nondecreasing time order. Throws GeometryError for an unknown edge.
  void set_edge_availability(EdgeId e, bool available, double t);
  bool is_available(EdgeId e, double t) const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<VertexId> origins_;
  std::vector<VertexId> destinations_;
};

// Standard 13-vertex, 19-arc benchmark; origins {1,4}, destinations {2,3}.
RoadNetwork build_nguyen_dupuis(double edge_length, double d1, int lanes);
std::vector<Arc> nguyen_dupuis_arcs(double edge_length, double d1, int lanes);

// Labels of the cascade network built by build_cascade.
struct CascadeLayout {
  int n_junctions = 0;
  int junction(int i) const { return i; }                      // i in 1..n
  int mainline_origin() const { return n_junctions + 1; }
  int ramp_origin(int i) const { return n_junctions + 1 + i; }  // i in 1..n
  int destination() const { return 2 * n_junctions + 2; }
};

// Mainline of n junctions J1..Jn ending in one destination; a mainline origin
// feeds J1 and ramp i feeds Ji. Every edge is mainline_d2 + d1 long.
RoadNetwork build_cascade(int n_junctions, double mainline_d2, double d1, int lanes = 1);

struct Path {
  std::vector<VertexId> vertices;
  std::vector<EdgeId> edges;
  double cost = 0.0;
};

// Minimum-weight path over edges available at time t. Ties are broken by the
// lowest next-vertex index. Returns nullopt when unreachable.
std::optional<Path> shortest_path(const RoadNetwork& net, VertexId origin, VertexId destination,
                                  std::span<const double> edge_weights, double t = 0.0);

// Cost-to-destination for every vertex over edges available at time t
// (+infinity when unreachable).
std::vector<double> distances_to(const RoadNetwork& net, VertexId destination,
                                 std::span<const double> edge_weights, double t = 0.0);

std::vector<double> free_flow_times(const RoadNetwork& net, double v0);

}  // namespace platoon
