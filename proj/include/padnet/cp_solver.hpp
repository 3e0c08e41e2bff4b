#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "padnet/cp_model.hpp"
#include "padnet/graph.hpp"
#include "padnet/lp.hpp"
#include "padnet/parallel.hpp"

namespace padnet {

// A demand as seen by whoever builds the program: its global index and paths.
struct ScopedDemand {
  int index;
  std::span<const AllowedPath> paths;
};

/**
   The LP of a network-design program over a set of edges in scope. Variables
   are x_<edge> for the scope edges that lie on some allowed path (ascending),
   then f_<demand>_<path> per demand, then one auxiliary for max-degree and
   p-norm objectives. Every allowed path must stay inside the scope.
 */
struct CpProgram {
  LpProblem lp;
  Objective objective;
  std::size_t edge_count = 0;  // m of the whole graph
  std::vector<EdgeId> scope;
  std::vector<int> demands;
  std::vector<int> flow_offset;
  std::size_t total_demands = 0;  // size of the instance's demand list
  std::vector<int> capacity_rows;  // x variable is the last term of each
  int aux = -1;
};

CpProgram build_cp_program(const Graph& g, const Objective& objective, std::span<const EdgeId> scope,
                           std::span<const ScopedDemand> demands, std::size_t total_demands);

// N(C): demands (u, v) with B(u, D) inside cluster.
std::vector<int> padded_demands(const CpInstance& inst, std::span<const NodeId> cluster,
                                const Graph& g);

// CP(C): edges E(C), demands N(C).
CpProgram build_cluster_cp(const CpInstance& inst, std::span<const NodeId> cluster, const Graph& g);

CpProgram build_global_cp(const CpInstance& inst, const Graph& g);

struct CpSolveOptions {
  LpOptions lp;
  // p-norm objectives with 1 < p < inf are solved by adding tangent cuts until
  // the norm of the LP point exceeds the LP bound by at most this (relative).
  double norm_gap = 1e-9;
  int max_cuts = 400;
};

struct CpSolution {
  EdgeVector x;                           // length m, zero outside scope
  std::vector<std::vector<double>> flow;  // by global demand; empty when out of scope
  double objective = 0.0;                 // g(x)
  LpStatus status = LpStatus::Optimal;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;  // upper minus lower bound, nonzero only for cut loops
  long pivots = 0;
  int lp_solves = 0;
  bool exact = false;
};

/**
   Solves program and normalizes the optimum: each demand's flow is scaled to
   total exactly 1 and x_e is lowered to the largest per-demand load on e.
   Neither step raises g, so the result is still optimal and x <= 1.
   Throws InternalError when the LP is infeasible or unbounded.
 */
CpSolution solve_cp(const CpProgram& program, const Graph& g, const CpSolveOptions& options = {});

// Exact optimum CP* of the whole instance.
CpSolution solve_global_oracle(const Graph& g, const CpInstance& inst,
                               const CpSolveOptions& options = {},
                               std::size_t path_cap = kDefaultPathCap);

struct FeasibilityReport {
  bool feasible = true;
  std::vector<double> achieved;  // max path flow per demand under capacities x
};

/**
   Per demand, maximizes sum f_P subject to sum_{P contains e} f_P <= x_e.
   Feasible iff every demand reaches 1 - tol.
 */
FeasibilityReport check_feasibility(const Graph& g, const CpInstance& inst, const EdgeVector& x,
                                    double tol = 1e-9, Execution exec = Execution::Serial);

/**
   Solved programs keyed by their sorted demand list. A program's edges are
   exactly those on its demands' allowed paths, so for one instance and one
   set of solver options the list determines the program. Not thread-safe.
 */
class ProgramCache {
 public:
  std::shared_ptr<const CpSolution> find(const std::vector<int>& demands) const;
  void insert(const std::vector<int>& demands, std::shared_ptr<const CpSolution> solution);
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::vector<int>, std::shared_ptr<const CpSolution>> entries_;
};

// Demand list of the global program: 0..|S|-1.
std::vector<int> all_demands(const CpInstance& inst);

// Worst violation of a path-flow certificate: capacity excess or flow shortfall.
double certificate_violation(const CpInstance& inst, const EdgeVector& x,
                             const std::vector<std::vector<double>>& flow);

}  // namespace padnet
