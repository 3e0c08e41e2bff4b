#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "padnet/graph.hpp"
#include "padnet/local_sim.hpp"
#include "padnet/parallel.hpp"
#include "padnet/rng.hpp"

namespace padnet {

/**
   Parameters of a (k, epsilon)-padded decomposition on an n-node graph.
   r = 2k/epsilon is the scale of the truncated exponential radius and
   radius_cap = r ln n + k bounds every sampled radius.
 */
struct PaddedDecompositionParams {
  int k = 0;
  double epsilon = 1.0;
  int n = 0;
  double r = 0.0;
  double radius_cap = 0.0;

  // Throws ConfigError unless k >= 0, 0 < epsilon <= 1 and n >= 1.
  static PaddedDecompositionParams make(int k, double epsilon, int n);

  // Largest integer hop radius any node can cover.
  int hop_cap() const;
};

/**
   A partition of the nodes into clusters, each named after its center.
   Cluster ids are numbered by ascending center id, so two clusterings with
   the same clusters compare equal.
 */
struct Clustering {
  std::vector<int> assignment;   // node -> cluster id
  std::vector<NodeId> centers;   // cluster id -> center node
  std::vector<double> radii;     // node -> sampled radius r_v
  std::vector<int> rank;         // node -> position in the permutation

  int cluster_count() const noexcept { return static_cast<int>(centers.size()); }
  NodeId center_of(NodeId u) const {
    return centers[static_cast<std::size_t>(assignment[static_cast<std::size_t>(u)])];
  }
  std::vector<std::vector<NodeId>> members() const;

  friend bool operator==(const Clustering&, const Clustering&) = default;
};

enum class PermutationMode { Random, IdOrder };

// Inverse CDF of the truncated exponential density n/(n-1) e^{-z/r} / r on
// [0, r ln n], capped at radius_cap. u must lie in [0, 1).
double radius_from_uniform(const PaddedDecompositionParams& params, double u);

// Draws one uniform from rng and maps it through radius_from_uniform.
// Throws InputError when params.n < 2.
double sample_radius(const PaddedDecompositionParams& params, RngStream& rng);

// Radius of node v in decomposition number `iteration` under `seed`. Shared by
// the centralized and distributed samplers so their radii always match.
double node_radius(const PaddedDecompositionParams& params, std::uint64_t seed,
                   std::uint64_t iteration, NodeId v);

struct CentralizedOptions {
  PermutationMode permutation = PermutationMode::Random;
  std::uint64_t iteration = 0;
};

/**
   Ball carving: every node u joins the cluster of the permutation-first v
   with d(v, u) <= r_v.
 */
Clustering sample_decomposition_centralized(const Graph& g, const PaddedDecompositionParams& params,
                                            std::uint64_t seed,
                                            const CentralizedOptions& options = {});
Clustering sample_decomposition_centralized(const DistanceMatrix& dist,
                                            const PaddedDecompositionParams& params,
                                            std::uint64_t seed,
                                            const CentralizedOptions& options = {});

// Batch of independent samples, iteration keys 0..count-1.
std::vector<Clustering> sample_decompositions_centralized(const DistanceMatrix& dist,
                                                          const PaddedDecompositionParams& params,
                                                          std::uint64_t seed, std::size_t count,
                                                          PermutationMode mode, Execution exec);

struct RouteEntry {
  NodeId center;
  NodeId parent;  // -1 at the center itself
};

/**
   Output of `count` decompositions sampled together by the flooding protocol.
   routes[i][u] lists, by ascending center id, every flood u accepted in run i
   and the neighbor it first came from. Following parents for a fixed center
   walks a shortest path to it, possibly through nodes of other clusters.
 */
struct DistributedDecomposition {
  std::vector<Clustering> runs;
  std::vector<std::vector<std::vector<RouteEntry>>> routes;
  RoundTranscript transcript;

  // Neighbor of u one hop closer to center in run i; throws InternalError
  // when u never heard center's flood.
  NodeId parent_toward(std::size_t run, NodeId u, NodeId center) const;
};

/**
   LOCAL protocol: every node draws r_v and floods (id, hop budget floor(r_v));
   after hop_cap() rounds each node joins the smallest id that reached it.
   All `count` runs share the same rounds; their messages are bundled.
 */
DistributedDecomposition sample_decompositions_distributed(const Graph& g,
                                                           const PaddedDecompositionParams& params,
                                                           std::uint64_t seed, std::size_t count,
                                                           const SimOptions& options = {});

struct SingleDecomposition {
  Clustering clustering;
  RoundTranscript transcript;
};

SingleDecomposition sample_decomposition_distributed(const Graph& g,
                                                     const PaddedDecompositionParams& params,
                                                     std::uint64_t seed,
                                                     const SimOptions& options = {});

// Largest pairwise hop distance (in g) between members of each cluster.
std::vector<int> cluster_diameters(const Clustering& c, const DistanceMatrix& dist);

// True when B(u, k) lies inside u's cluster.
bool is_padded(const Clustering& c, NodeId u, int k, const DistanceMatrix& dist);

// Throws InternalError when a type invariant fails (totality, center distance,
// radius cap, canonical ids).
void check_clustering(const Clustering& c, const PaddedDecompositionParams& params,
                      const DistanceMatrix& dist);

// CSV: node,cluster_id,center,r_v
void write_clustering_csv(std::ostream& out, const Clustering& c);

}  // namespace padnet
