#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "padnet/cp_model.hpp"
#include "padnet/cp_solver.hpp"
#include "padnet/local_sim.hpp"
#include "padnet/padded_decomposition.hpp"

namespace padnet {

/**
   Parameters of the distributed approximation. lambda and t are derived
   from epsilon and n; D comes from the instance.
 */
struct SolverConfig {
  double epsilon = 0.5;
  double lambda = 0.0;
  int t = 1;
  int max_path_length = 0;
  std::uint64_t seed = 0;

  // Throws ConfigError unless 0 < epsilon < 1.
  static SolverConfig make(double epsilon, int n, int max_path_length, std::uint64_t seed);

  // Decomposition used in every iteration: (D, lambda)-padded.
  PaddedDecompositionParams decomposition(int n) const;

  // 5 ((2D / lambda) ln n + D) + 10.
  double round_bound(int n) const;
};

double solver_lambda(double epsilon);
int solver_iterations(double epsilon, int n);

struct ClusterRecord {
  NodeId center = 0;
  std::vector<NodeId> members;
  std::vector<int> demands;  // N(C)
  std::shared_ptr<const CpSolution> solution;
};

struct IterationRecord {
  int index = 0;
  Clustering clustering;
  std::vector<ClusterRecord> clusters;  // by cluster id
  std::vector<char> padded;             // node -> B(u, D) inside its cluster
};

struct DistributedOptions {
  Execution execution = Execution::Serial;
  CpSolveOptions cp;
  int max_rounds = 1 << 20;
  // Shared with other solves of the same instance (e.g. the global oracle).
  ProgramCache* cache = nullptr;
};

struct DistributedResult {
  EdgeVector x;  // x~
  double objective = 0.0;
  RoundTranscript transcript;
  std::vector<IterationRecord> iterations;
  std::vector<int> padded_count;  // |I_u|
  std::vector<int> shared_count;  // |I_{u,v}| per edge
  int distinct_programs = 0;      // distinct cluster programs across all iterations
};

/**
   Decomposition plus the depth-D probe by which every node learns whether its
   D-ball stays inside its own cluster. Also used on its own to study the
   padding counts without solving anything.
 */
struct ProbeResult {
  DistributedDecomposition decomposition;
  std::vector<std::vector<char>> padded;          // [run][node]
  std::vector<std::vector<NodeId>> edge_centers;  // [run][edge]: shared center, -1 if split
  RoundTranscript transcript;
};

ProbeResult decompose_and_probe(const Graph& g, const SolverConfig& config,
                                const DistributedOptions& options = {});

DistributedResult solve_distributed(const Graph& g, const CpInstance& inst, const SolverConfig& config,
                                    const DistributedOptions& options = {});

/**
   Averaged flow certificate of one demand over the iterations that padded its
   source. Throws NoCertificateError when |I_u| = 0.
 */
std::vector<double> implied_flow(const DistributedResult& result, const CpInstance& inst, int demand);

// All demands; throws NoCertificateError if any source was never padded.
std::vector<std::vector<double>> implied_flows(const DistributedResult& result, const CpInstance& inst);

struct ConcentrationReport {
  double threshold = 0.0;             // t / (1 + epsilon)
  std::vector<char> node_pass;        // |I_u| > threshold, every node
  int sources = 0;                    // distinct demand sources
  int sources_passing = 0;
  bool all_sources_pass = true;
  double node_pass_fraction = 0.0;
};

ConcentrationReport concentration_report(const std::vector<int>& padded_count, const CpInstance& inst,
                                         const SolverConfig& config);

}  // namespace padnet
