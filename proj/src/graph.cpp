#include "padnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "padnet/error.hpp"

namespace padnet {

Graph::Graph(int node_count, std::vector<Edge> edges, bool directed)
    : node_count_(node_count), directed_(directed), edges_(std::move(edges)) {
  if (node_count_ < 0) {
    throw InputError("node count must be nonnegative");
  }
  const auto n = static_cast<std::size_t>(node_count_);
  out_.resize(n);
  in_.resize(n);
  shadow_.resize(n);
  incident_.resize(n);

  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto [u, v] = edges_[i];
    if (!valid_node(u) || !valid_node(v)) {
      throw InputError("edge " + std::to_string(i) + " has an endpoint outside [0, n)");
    }
    if (u == v) {
      throw InputError("self-loop at node " + std::to_string(u));
    }
    auto key = directed_ ? std::pair{u, v} : std::pair{std::min(u, v), std::max(u, v)};
    if (!seen.insert(key).second) {
      throw InputError("duplicate edge " + std::to_string(u) + " " + std::to_string(v));
    }
    const auto e = static_cast<EdgeId>(i);
    out_[static_cast<std::size_t>(u)].push_back({v, e});
    in_[static_cast<std::size_t>(v)].push_back({u, e});
    if (!directed_) {
      out_[static_cast<std::size_t>(v)].push_back({u, e});
      in_[static_cast<std::size_t>(u)].push_back({v, e});
    }
    shadow_[static_cast<std::size_t>(u)].push_back(v);
    shadow_[static_cast<std::size_t>(v)].push_back(u);
    incident_[static_cast<std::size_t>(u)].push_back(e);
    incident_[static_cast<std::size_t>(v)].push_back(e);
  }

  auto by_head = [](const Arc& a, const Arc& b) { return a.head < b.head; };
  for (std::size_t u = 0; u < n; ++u) {
    std::sort(out_[u].begin(), out_[u].end(), by_head);
    std::sort(in_[u].begin(), in_[u].end(), by_head);
    auto& nb = shadow_[u];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

void Graph::check_node(NodeId u) const {
  if (!valid_node(u)) {
    throw InputError("node " + std::to_string(u) + " outside [0, " +
                     std::to_string(node_count_) + ")");
  }
}

std::optional<EdgeId> Graph::find_edge(NodeId u, NodeId v) const {
  const auto arcs = out_arcs(u);
  check_node(v);
  auto it = std::lower_bound(arcs.begin(), arcs.end(), v,
                             [](const Arc& a, NodeId head) { return a.head < head; });
  if (it != arcs.end() && it->head == v) {
    return it->edge;
  }
  return std::nullopt;
}

EdgeVector::EdgeVector(std::size_t m, double fill) : values_(m, fill) {
  if (!(fill >= 0.0)) {
    throw InputError("edge vector entries must be nonnegative");
  }
}

EdgeVector::EdgeVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!(v >= 0.0)) {
      throw InputError("edge vector entries must be nonnegative");
    }
  }
}

void EdgeVector::set(EdgeId e, double value) {
  if (!(value >= 0.0)) {
    throw InputError("edge vector entries must be nonnegative");
  }
  values_.at(static_cast<std::size_t>(e)) = value;
}

std::vector<int> undirected_distances(const Graph& g, NodeId source) {
  g.check_node(source);
  std::vector<int> dist(static_cast<std::size_t>(g.node_count()), kUnreachable);
  std::vector<NodeId> frontier{source};
  dist[static_cast<std::size_t>(source)] = 0;
  for (int level = 1; !frontier.empty(); ++level) {
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      for (NodeId w : g.neighbors(u)) {
        auto& d = dist[static_cast<std::size_t>(w)];
        if (d == kUnreachable) {
          d = level;
          next.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

std::vector<int> directed_distances(const Graph& g, NodeId source, Orientation orientation) {
  return truncated_arborescence(g, source, kUnreachable, orientation).level;
}

int undirected_distance(const Graph& g, NodeId u, NodeId v) {
  g.check_node(v);
  return undirected_distances(g, u)[static_cast<std::size_t>(v)];
}

std::vector<NodeId> ball(const Graph& g, NodeId u, double radius) {
  if (!(radius >= 0.0)) {
    throw InputError("ball radius must be nonnegative");
  }
  const auto dist = undirected_distances(g, u);
  std::vector<NodeId> out;
  for (NodeId w = 0; w < g.node_count(); ++w) {
    const int d = dist[static_cast<std::size_t>(w)];
    if (d != kUnreachable && static_cast<double>(d) <= radius) {
      out.push_back(w);
    }
  }
  return out;
}

std::vector<char> node_mask(int n, std::span<const NodeId> nodes) {
  std::vector<char> mask(static_cast<std::size_t>(n), 0);
  for (NodeId u : nodes) {
    if (u < 0 || u >= n) {
      throw InputError("node " + std::to_string(u) + " outside [0, n)");
    }
    mask[static_cast<std::size_t>(u)] = 1;
  }
  return mask;
}

EdgeVector restrict_to(const EdgeVector& x, std::span<const NodeId> cluster, const Graph& g) {
  if (x.size() != static_cast<std::size_t>(g.edge_count())) {
    throw InputError("edge vector length differs from edge count");
  }
  const auto inside = node_mask(g.node_count(), cluster);
  EdgeVector out(x.size());
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto [u, v] = g.edge(e);
    if (inside[static_cast<std::size_t>(u)] && inside[static_cast<std::size_t>(v)]) {
      out.set(e, x[e]);
    }
  }
  return out;
}

Arborescence truncated_arborescence(const Graph& g, NodeId root, int depth,
                                    Orientation orientation) {
  g.check_node(root);
  if (depth < 0) {
    throw InputError("arborescence depth must be nonnegative");
  }
  const auto n = static_cast<std::size_t>(g.node_count());
  Arborescence tree;
  tree.root = root;
  tree.depth_bound = depth;
  tree.orientation = orientation;
  tree.parent.assign(n, -1);
  tree.level.assign(n, kUnreachable);
  tree.level[static_cast<std::size_t>(root)] = 0;

  // Scanning each level in ascending node order makes the first discoverer
  // the lowest-index parent.
  std::vector<NodeId> frontier{root};
  for (int level = 1; level <= depth && !frontier.empty(); ++level) {
    std::sort(frontier.begin(), frontier.end());
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      const auto arcs = orientation == Orientation::Out ? g.out_arcs(u) : g.in_arcs(u);
      for (const auto& arc : arcs) {
        const auto w = static_cast<std::size_t>(arc.head);
        if (tree.level[w] == kUnreachable) {
          tree.level[w] = level;
          tree.parent[w] = u;
          tree.edges.push_back(arc.edge);
          next.push_back(arc.head);
        }
      }
    }
    frontier = std::move(next);
  }
  return tree;
}

DistanceMatrix::DistanceMatrix(const Graph& g) : n_(g.node_count()) {
  dist_.reserve(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
  for (NodeId u = 0; u < n_; ++u) {
    const auto row = undirected_distances(g, u);
    dist_.insert(dist_.end(), row.begin(), row.end());
  }
}

Graph read_graph(std::istream& in) {
  long long n = -1;
  long long m = -1;
  std::string kind;
  if (!(in >> n >> m >> kind) || n < 0 || m < 0) {
    throw InputError("graph header must be 'n m directed|undirected'");
  }
  if (kind != "directed" && kind != "undirected") {
    throw InputError("graph kind must be 'directed' or 'undirected', got '" + kind + "'");
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    long long u = 0;
    long long v = 0;
    if (!(in >> u >> v)) {
      throw InputError("graph file ends after " + std::to_string(i) + " of " +
                       std::to_string(m) + " edges");
    }
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }
  return Graph(static_cast<int>(n), std::move(edges), kind == "directed");
}

void write_graph(std::ostream& out, const Graph& g) {
  out << g.node_count() << ' ' << g.edge_count() << ' '
      << (g.directed() ? "directed" : "undirected") << '\n';
  for (const auto& e : g.edges()) {
    out << e.from << ' ' << e.to << '\n';
  }
}

void write_edge_subset(std::ostream& out, const Graph& g, std::span<const EdgeId> edges) {
  out << g.node_count() << ' ' << edges.size() << ' '
      << (g.directed() ? "directed" : "undirected") << '\n';
  for (EdgeId e : edges) {
    const auto& edge = g.edge(e);
    out << edge.from << ' ' << edge.to << '\n';
  }
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open graph file " + path);
  }
  return read_graph(in);
}

void save_graph(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) {
    throw InputError("cannot write graph file " + path);
  }
  write_graph(out, g);
}

}  // namespace padnet
