#pragma once

#include <cstdint>
#include <vector>

#include "padnet/cp_model.hpp"
#include "padnet/graph.hpp"

namespace padnet {

// G(n, p): every ordered pair (or unordered pair when undirected) is an edge
// independently with probability p. attempt selects an independent stream so
// callers can regenerate.
Graph gnp_graph(int n, double p, std::uint64_t seed, bool directed = true,
                std::uint64_t attempt = 0);

// Cycle 0 -> 1 -> ... -> n-1 -> 0; both directions when bidirected.
Graph cycle_graph(int n, bool directed = true, bool bidirected = false);

// rows x cols grid, node r * cols + c.
Graph grid_graph(int rows, int cols, bool directed = false);

struct DsnDemandOptions {
  int max_distance = 2;  // partner drawn among nodes this close
  int slack = 1;         // L(u, v) = d_G(u, v) + slack
};

/**
   Demands whose endpoints cover every node: each node not yet covered picks a
   random partner it reaches within max_distance (or one reaching it).
   Throws InfeasibleDemandError when some node has no such partner.
 */
std::vector<Demand> spanning_demands(const Graph& g, std::uint64_t seed, std::uint64_t attempt = 0,
                                     const DsnDemandOptions& options = {});

}  // namespace padnet
