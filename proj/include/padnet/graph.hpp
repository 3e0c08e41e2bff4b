#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace padnet {

using NodeId = int;
using EdgeId = int;

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

struct Edge {
  NodeId from;
  NodeId to;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/**
   Directed or undirected simple graph on nodes 0..n-1.

   Every distance used by the distributed algorithms is a hop distance in the
   undirected shadow (the communication graph), so the shadow adjacency is
   built once at construction. Directed traversal (paths, arborescences)
   follows edge orientation; for undirected graphs every edge can be crossed
   both ways.

   Immutable after construction.
 */
class Graph {
 public:
  struct Arc {
    NodeId head;
    EdgeId edge;
  };

  Graph() = default;
  Graph(int node_count, std::vector<Edge> edges, bool directed);

  int node_count() const noexcept { return node_count_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  bool directed() const noexcept { return directed_; }

  const Edge& edge(EdgeId e) const { return edges_.at(static_cast<std::size_t>(e)); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  // Arcs leaving / entering a node along edge orientation, sorted by the
  // other endpoint. For in_arcs, Arc::head is the tail of the edge.
  std::span<const Arc> out_arcs(NodeId u) const { return out_[checked(u)]; }
  std::span<const Arc> in_arcs(NodeId u) const { return in_[checked(u)]; }

  // Communication-graph neighbors, sorted and unique.
  std::span<const NodeId> neighbors(NodeId u) const { return shadow_[checked(u)]; }

  // Edges with u as an endpoint, ascending.
  std::span<const EdgeId> incident_edges(NodeId u) const { return incident_[checked(u)]; }

  // Edge traversable from u to v (either orientation when undirected).
  std::optional<EdgeId> find_edge(NodeId u, NodeId v) const;

  bool valid_node(NodeId u) const noexcept { return u >= 0 && u < node_count_; }
  void check_node(NodeId u) const;

 private:
  std::size_t checked(NodeId u) const {
    check_node(u);
    return static_cast<std::size_t>(u);
  }

  int node_count_ = 0;
  bool directed_ = true;
  std::vector<Edge> edges_;
  std::vector<std::vector<Arc>> out_;
  std::vector<std::vector<Arc>> in_;
  std::vector<std::vector<NodeId>> shadow_;
  std::vector<std::vector<EdgeId>> incident_;
};

/**
   Nonnegative value per edge, indexed by EdgeId.
 */
class EdgeVector {
 public:
  EdgeVector() = default;
  explicit EdgeVector(std::size_t m, double fill = 0.0);
  explicit EdgeVector(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](EdgeId e) const { return values_[static_cast<std::size_t>(e)]; }
  void set(EdgeId e, double value);
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const EdgeVector&, const EdgeVector&) = default;

 private:
  std::vector<double> values_;
};

enum class Orientation { Out, In };

/**
   BFS shortest-path tree along edge orientation, truncated at depth_bound.
   level[w] is the tree depth of w, kUnreachable when w is not in the tree.
 */
struct Arborescence {
  NodeId root = 0;
  int depth_bound = 0;
  Orientation orientation = Orientation::Out;
  std::vector<EdgeId> edges;
  std::vector<NodeId> parent;
  std::vector<int> level;
};

// Undirected hop distances from source; kUnreachable when disconnected.
std::vector<int> undirected_distances(const Graph& g, NodeId source);

// Hop distances following edge orientation (Out) or against it (In).
std::vector<int> directed_distances(const Graph& g, NodeId source,
                                    Orientation orientation = Orientation::Out);

int undirected_distance(const Graph& g, NodeId u, NodeId v);

// B(u, radius) in the communication graph, ascending node order.
std::vector<NodeId> ball(const Graph& g, NodeId u, double radius);

// Zero every entry whose edge has an endpoint outside cluster.
EdgeVector restrict_to(const EdgeVector& x, std::span<const NodeId> cluster, const Graph& g);

Arborescence truncated_arborescence(const Graph& g, NodeId root, int depth,
                                    Orientation orientation);

std::vector<char> node_mask(int n, std::span<const NodeId> nodes);

/**
   All-pairs undirected hop distances, for desk-scale graphs.
 */
class DistanceMatrix {
 public:
  explicit DistanceMatrix(const Graph& g);

  int n() const noexcept { return n_; }
  int operator()(NodeId u, NodeId v) const {
    return dist_[static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) +
                 static_cast<std::size_t>(v)];
  }

 private:
  int n_ = 0;
  std::vector<int> dist_;
};

// Graph file: header "n m directed|undirected", then m lines "u v".
Graph read_graph(std::istream& in);
void write_graph(std::ostream& out, const Graph& g);
Graph load_graph(const std::string& path);
void save_graph(const std::string& path, const Graph& g);

// Same format for a subset of g's edges (e.g. a spanner).
void write_edge_subset(std::ostream& out, const Graph& g, std::span<const EdgeId> edges);

}  // namespace padnet
