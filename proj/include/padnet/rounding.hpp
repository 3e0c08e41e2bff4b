#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "padnet/cp_model.hpp"
#include "padnet/graph.hpp"
#include "padnet/local_sim.hpp"

namespace padnet {

enum Provenance : unsigned char {
  kSampled = 1,
  kArborescence = 2,
};

struct SpannerOutput {
  std::vector<EdgeId> edges;                // ascending
  std::vector<unsigned char> provenance;    // per output edge, kSampled | kArborescence
  std::vector<NodeId> roots;                // ascending

  friend bool operator==(const SpannerOutput&, const SpannerOutput&) = default;
};

// Keys of one rounding trial; every coin is a function of (seed, trial, owner).
struct RoundingKey {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
};

double edge_probability(int n, double x);  // min(sqrt(n) ln n x, 1)
double root_probability(int n);            // 3 ln n / sqrt(n)

/**
   Thin-edge sampling plus in/out arborescences truncated at depth, rooted at
   independently sampled nodes. The coin of an edge belongs to its
   smaller-id endpoint, which draws for its edges in ascending edge order.
 */
SpannerOutput round_spanner(const Graph& g, const EdgeVector& x, int depth, const RoundingKey& key);

struct DistributedRounding {
  SpannerOutput output;
  RoundTranscript transcript;
};

// The same rounding as a LOCAL protocol; identical output for identical keys.
DistributedRounding round_spanner_distributed(const Graph& g, const EdgeVector& x, int depth,
                                              const RoundingKey& key, const SimOptions& options = {});

// Each edge independently with probability x_e^{1/k}. Throws InputError when
// some x_e > 1 or k < 1.
std::vector<EdgeId> round_low_degree(const Graph& g, const EdgeVector& x, int k, const RoundingKey& key);

struct StretchReport {
  bool valid = true;
  std::vector<int> violated;  // demand indices with d_H(u, v) > L(u, v)
};

StretchReport verify_stretch(const Graph& g, const std::vector<EdgeId>& edges, const CpInstance& inst);

// Per demand: nodes on its allowed paths, and thick iff |N|^2 >= n.
struct EdgeClass {
  std::vector<int> path_nodes;
  std::vector<char> thick;
};

EdgeClass classify_edges(const Graph& g, const CpInstance& inst);

// CSV: edge,from,to,sampled,arborescence
void write_provenance_csv(std::ostream& out, const Graph& g, const SpannerOutput& s);

}  // namespace padnet
