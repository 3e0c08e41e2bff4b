#include "padnet/generators.hpp"

#include "padnet/error.hpp"
#include "padnet/rng.hpp"

namespace padnet {

Graph gnp_graph(int n, double p, std::uint64_t seed, bool directed, std::uint64_t attempt) {
  if (n < 1) {
    throw ConfigError("G(n, p) needs n >= 1");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError("G(n, p) needs p in [0, 1]");
  }
  RngStream rng(seed, StreamTag::Generator, attempt, 0);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = directed ? 0 : u + 1; v < n; ++v) {
      if (u != v && rng.uniform() < p) {
        edges.push_back({u, v});
      }
    }
  }
  return Graph(n, std::move(edges), directed);
}

Graph cycle_graph(int n, bool directed, bool bidirected) {
  if (n < 3) {
    throw ConfigError("cycle needs n >= 3");
  }
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    edges.push_back({u, (u + 1) % n});
  }
  if (directed && bidirected) {
    for (NodeId u = 0; u < n; ++u) {
      edges.push_back({(u + 1) % n, u});
    }
  }
  return Graph(n, std::move(edges), directed);
}

Graph grid_graph(int rows, int cols, bool directed) {
  if (rows < 1 || cols < 1) {
    throw ConfigError("grid needs positive dimensions");
  }
  std::vector<Edge> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const NodeId u = r * cols + c;
      if (c + 1 < cols) edges.push_back({u, u + 1});
      if (r + 1 < rows) edges.push_back({u, u + cols});
    }
  }
  if (directed) {
    const std::size_t m = edges.size();
    for (std::size_t i = 0; i < m; ++i) {
      edges.push_back({edges[i].to, edges[i].from});
    }
  }
  return Graph(rows * cols, std::move(edges), directed);
}

std::vector<Demand> spanning_demands(const Graph& g, std::uint64_t seed, std::uint64_t attempt,
                                     const DsnDemandOptions& options) {
  if (options.max_distance < 1 || options.slack < 0) {
    throw ConfigError("demand sampling needs max_distance >= 1 and slack >= 0");
  }
  const int n = g.node_count();
  RngStream rng(seed, StreamTag::Demands, attempt, 0);
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  std::vector<Demand> demands;
  for (NodeId u = 0; u < n; ++u) {
    if (covered[static_cast<std::size_t>(u)]) continue;
    const auto out = directed_distances(g, u, Orientation::Out);
    const auto in = directed_distances(g, u, Orientation::In);
    std::vector<NodeId> forward;
    std::vector<NodeId> backward;
    for (NodeId v = 0; v < n; ++v) {
      if (v == u) continue;
      if (out[static_cast<std::size_t>(v)] <= options.max_distance) forward.push_back(v);
      if (in[static_cast<std::size_t>(v)] <= options.max_distance) backward.push_back(v);
    }
    if (!forward.empty()) {
      const NodeId v = forward[rng.below(forward.size())];
      demands.push_back({u, v, out[static_cast<std::size_t>(v)] + options.slack});
      covered[static_cast<std::size_t>(v)] = 1;
    } else if (!backward.empty()) {
      const NodeId v = backward[rng.below(backward.size())];
      demands.push_back({v, u, in[static_cast<std::size_t>(v)] + options.slack});
      covered[static_cast<std::size_t>(v)] = 1;
    } else {
      throw InfeasibleDemandError("node " + std::to_string(u) + " has no demand partner within distance " +
                                  std::to_string(options.max_distance));
    }
    covered[static_cast<std::size_t>(u)] = 1;
  }
  return demands;
}

}  // namespace padnet
