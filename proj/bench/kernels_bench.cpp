// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "padnet/cp_solver.hpp"
#include "padnet/distributed_cp.hpp"
#include "padnet/experiment.hpp"
#include "padnet/generators.hpp"
#include "padnet/padded_decomposition.hpp"
#include "padnet/rounding.hpp"

using namespace padnet;

namespace {

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

void BM_CentralizedDecompositionBatch(benchmark::State& state) {
  const Graph g = gnp_graph(64, 0.05, 1);
  const DistanceMatrix dm(g);
  const auto p = PaddedDecompositionParams::make(2, 0.25, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sample_decompositions_centralized(dm, p, 3, 512, PermutationMode::Random, exec_of(state)));
  }
  label(state);
}

void BM_DistributedDecomposition(benchmark::State& state) {
  const Graph g = gnp_graph(64, 0.05, 1);
  const auto p = PaddedDecompositionParams::make(1, 0.5, 64);
  SimOptions opt;
  opt.execution = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_decompositions_distributed(g, p, 3, 64, opt));
  }
  label(state);
}

void BM_SolveDistributed(benchmark::State& state) {
  const Graph g = gnp_graph(20, 0.2, 2);
  const auto inst = build_spanner_instance(g, 2);
  auto config = SolverConfig::make(0.5, 20, inst.demands.max_path_length, 5);
  // a large lambda gives many clusters and distinct programs per run
  config.lambda = 0.9;
  config.t = 32;
  DistributedOptions opt;
  opt.execution = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_distributed(g, inst, config, opt));
  }
  label(state);
}

void BM_CheckFeasibility(benchmark::State& state) {
  const Graph g = gnp_graph(32, 0.2, 4);
  const auto inst = build_spanner_instance(g, 2);
  const EdgeVector x(static_cast<std::size_t>(g.edge_count()), 0.6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_feasibility(g, inst, x, 1e-9, exec_of(state)));
  }
  label(state);
}

void BM_DistributedRounding(benchmark::State& state) {
  const Graph g = gnp_graph(64, 0.1, 6);
  const EdgeVector x(static_cast<std::size_t>(g.edge_count()), 0.01);
  SimOptions opt;
  opt.execution = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(round_spanner_distributed(g, x, 2, {1, 0}, opt));
  }
  label(state);
}

void BM_RunExperiment(benchmark::State& state) {
  ExperimentConfig c;
  c.n = 12;
  c.p = 0.3;
  c.trials = 4;
  c.seed = 9;
  c.execution = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_experiment(c));
  }
  label(state);
}

}  // namespace

BENCHMARK(BM_CentralizedDecompositionBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistributedDecomposition)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveDistributed)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CheckFeasibility)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistributedRounding)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunExperiment)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
