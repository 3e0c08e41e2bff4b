#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "padnet/distributed_cp.hpp"
#include "padnet/error.hpp"
#include "padnet/generators.hpp"

using namespace padnet;

namespace {

struct Solved {
  Graph g;
  CpInstance inst;
  SolverConfig config;
  DistributedResult result;
  CpSolution oracle;
};

Solved solve_spanner(int n, double p, std::uint64_t seed, double eps, Objective obj = Objective::linear_sum()) {
  Solved s;
  s.g = gnp_graph(n, p, seed);
  s.inst = build_spanner_instance(s.g, 2, obj);
  s.config = SolverConfig::make(eps, n, s.inst.demands.max_path_length, seed * 31 + 7);
  ProgramCache cache;
  s.oracle = solve_global_oracle(s.g, s.inst);
  cache.insert(all_demands(s.inst), std::make_shared<const CpSolution>(s.oracle));
  DistributedOptions opt;
  opt.cache = &cache;
  s.result = solve_distributed(s.g, s.inst, s.config, opt);
  return s;
}

}  // namespace

TEST(SolverConfig, Formulas) {
  EXPECT_NEAR(solver_lambda(0.5), 0.25 / 2.25, 1e-15);
  EXPECT_NEAR(solver_lambda(0.25), 0.1875 / (1.75 * 1.25), 1e-15);
  // 16 * 0.75 * 1.5 * ln 24 / 0.25 = 228.83...
  EXPECT_EQ(solver_iterations(0.5, 24), 229);
  EXPECT_EQ(solver_iterations(0.5, 1), 1);
  const auto c = SolverConfig::make(0.5, 24, 2, 1);
  EXPECT_GT(c.lambda, 0.0);
  EXPECT_LT(c.lambda, 1.0);
  EXPECT_NEAR(c.round_bound(24), 5.0 * ((4.0 / c.lambda) * std::log(24.0) + 2.0) + 10.0, 1e-9);
  EXPECT_EQ(c.decomposition(24).k, 2);
  EXPECT_DOUBLE_EQ(c.decomposition(24).epsilon, c.lambda);
  for (double bad : {0.0, 1.0, -0.2, 1.5}) EXPECT_THROW(SolverConfig::make(bad, 10, 2, 1), ConfigError);
  EXPECT_THROW(SolverConfig::make(0.5, 0, 2, 1), ConfigError);
}

TEST(SolveDistributed, RejectsMismatchedD) {
  const Graph g = gnp_graph(10, 0.3, 1);
  const auto inst = build_spanner_instance(g, 2);
  const auto c = SolverConfig::make(0.5, 10, inst.demands.max_path_length + 1, 1);
  EXPECT_THROW(solve_distributed(g, inst, c), ConfigError);
}

TEST(SolveDistributed, NoDemandsGivesZero) {
  const Graph g = gnp_graph(10, 0.3, 1);
  const auto inst = build_dsn_instance(g, {});
  const auto c = SolverConfig::make(0.5, 10, inst.demands.max_path_length, 1);
  const auto r = solve_distributed(g, inst, c);
  EXPECT_DOUBLE_EQ(r.objective, 0.0);
  EXPECT_EQ(r.x, EdgeVector(static_cast<std::size_t>(g.edge_count()), 0.0));
}

TEST(SolveDistributed, SingleClusterIterationsSolveTheGlobalProgram) {
  const auto s = solve_spanner(12, 0.3, 3, 0.5);
  int single = 0;
  for (const auto& it : s.result.iterations) {
    if (it.clustering.cluster_count() != 1) continue;
    ++single;
    EXPECT_EQ(it.clusters[0].demands, all_demands(s.inst));
    EXPECT_NEAR(it.clusters[0].solution->objective, s.oracle.objective, 1e-9);
  }
  // lambda is small, so most iterations are one cluster
  EXPECT_GT(single, s.config.t / 2);
}

TEST(SolveDistributed, BoundAndFeasibilityOnRandomDigraphs) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto s = solve_spanner(24, 0.3, seed, 0.5);
    EXPECT_LE(s.result.objective, 1.5 * s.oracle.objective + 1e-6) << "seed " << seed;
    const auto conc = concentration_report(s.result.padded_count, s.inst, s.config);
    if (conc.all_sources_pass) {
      EXPECT_TRUE(check_feasibility(s.g, s.inst, s.result.x).feasible) << "seed " << seed;
      const auto flows = implied_flows(s.result, s.inst);
      for (const auto& f : flows) EXPECT_GE(std::accumulate(f.begin(), f.end(), 0.0), 1.0 - 1e-9);
      EXPECT_LE(certificate_violation(s.inst, s.result.x, flows), 1e-9);
    }
    EXPECT_TRUE(s.result.transcript.consistent());
    EXPECT_LE(s.result.transcript.rounds_elapsed, s.config.round_bound(24));
  }
}

TEST(SolveDistributed, EdgeSharingContainsPadding) {
  const auto s = solve_spanner(16, 0.25, 4, 0.5);
  for (EdgeId e = 0; e < s.g.edge_count(); ++e) {
    const auto& ed = s.g.edge(e);
    EXPECT_GE(s.result.shared_count[static_cast<std::size_t>(e)], s.result.padded_count[static_cast<std::size_t>(ed.from)]);
    EXPECT_GE(s.result.shared_count[static_cast<std::size_t>(e)], s.result.padded_count[static_cast<std::size_t>(ed.to)]);
    EXPECT_LE(s.result.shared_count[static_cast<std::size_t>(e)], s.config.t);
  }
}

TEST(SolveDistributed, AveragingFormula) {
  const auto s = solve_spanner(14, 0.3, 6, 0.5);
  const double scale = 1.5 / s.config.t;
  for (EdgeId e = 0; e < s.g.edge_count(); ++e) {
    double sum = 0.0;
    for (const auto& it : s.result.iterations) {
      const auto& ed = s.g.edge(e);
      if (it.clustering.assignment[static_cast<std::size_t>(ed.from)] !=
          it.clustering.assignment[static_cast<std::size_t>(ed.to)]) {
        continue;
      }
      sum += it.clusters[static_cast<std::size_t>(it.clustering.assignment[static_cast<std::size_t>(ed.from)])].solution->x[e];
    }
    EXPECT_DOUBLE_EQ(s.result.x[e], std::min(1.0, scale * sum));
  }
}

TEST(SolveDistributed, ClusterOptimaBelowRestrictedGlobal) {
  for (const auto& obj : {Objective::linear_sum(), Objective::max_degree()}) {
    const auto s = solve_spanner(16, 0.25, 2, 0.25, obj);
    for (const auto& it : s.result.iterations) {
      std::vector<double> values;
      const auto members = it.clustering.members();
      for (std::size_t c = 0; c < it.clusters.size(); ++c) {
        const double restricted = evaluate_objective(obj, restrict_to(s.oracle.x, members[c], s.g), s.g);
        EXPECT_LE(it.clusters[c].solution->objective, restricted + 1e-9);
        values.push_back(it.clusters[c].solution->objective);
      }
      EXPECT_LE(combiner_value(obj, values), s.oracle.objective + 1e-9);
    }
  }
}

TEST(SolveDistributed, ProbeMatchesPaddingDefinition) {
  const Graph g = gnp_graph(20, 0.12, 5);
  const auto inst = build_spanner_instance(g, 2);
  // a larger epsilon keeps radii small enough to cut the graph
  auto c = SolverConfig::make(0.5, 20, inst.demands.max_path_length, 9);
  c.lambda = 0.9;
  c.t = 12;
  const auto probe = decompose_and_probe(g, c);
  const DistanceMatrix dm(g);
  int cut = 0;
  for (std::size_t run = 0; run < probe.padded.size(); ++run) {
    const auto& cl = probe.decomposition.runs[run];
    cut += cl.cluster_count() > 1;
    for (NodeId u = 0; u < 20; ++u) {
      EXPECT_EQ(probe.padded[run][static_cast<std::size_t>(u)] != 0, is_padded(cl, u, c.max_path_length, dm));
    }
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      const NodeId a = cl.center_of(g.edge(e).from);
      const NodeId b = cl.center_of(g.edge(e).to);
      EXPECT_EQ(probe.edge_centers[run][static_cast<std::size_t>(e)], a == b ? a : -1);
    }
  }
  EXPECT_GT(cut, 0);
}

TEST(SolveDistributed, DeterministicAndSchedulingIndependent) {
  const Graph g = gnp_graph(14, 0.3, 8);
  const auto inst = build_spanner_instance(g, 2);
  const auto c = SolverConfig::make(0.5, 14, inst.demands.max_path_length, 77);
  const auto a = solve_distributed(g, inst, c);
  const auto b = solve_distributed(g, inst, c);
  DistributedOptions par;
  par.execution = Execution::Parallel;
  const auto d = solve_distributed(g, inst, c, par);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.x, d.x);
  EXPECT_EQ(a.transcript, d.transcript);
  EXPECT_EQ(a.padded_count, d.padded_count);

  // a cache changes wall time only
  ProgramCache cache;
  DistributedOptions cached;
  cached.cache = &cache;
  const auto e = solve_distributed(g, inst, c, cached);
  EXPECT_EQ(a.x, e.x);
  EXPECT_EQ(static_cast<std::size_t>(e.distinct_programs), cache.size());
}

TEST(ImpliedFlow, NoCertificateWithoutPadding) {
  const Graph g(2, {{0, 1}}, true);
  const auto inst = build_dsn_instance(g, {{0, 1, 1}});
  DistributedResult fake;
  IterationRecord rec;
  rec.padded = {0, 0};
  fake.iterations.push_back(rec);
  EXPECT_THROW(implied_flow(fake, inst, 0), NoCertificateError);
  EXPECT_THROW(implied_flow(fake, inst, 3), InputError);
}

TEST(ImpliedFlow, IdenticalIterationsAverageToTheCommonFlow) {
  const Graph g(3, {{0, 1}, {1, 2}, {0, 2}}, true);
  const auto inst = build_dsn_instance(g, {{0, 2, 2}});
  auto sol = std::make_shared<CpSolution>();
  sol->flow = {{0.25, 0.75}};
  DistributedResult fake;
  for (int i = 0; i < 3; ++i) {
    IterationRecord rec;
    rec.clustering.assignment = {0, 0, 0};
    rec.clustering.centers = {0};
    rec.padded = {1, 1, 1};
    rec.clusters.push_back({0, {0, 1, 2}, {0}, sol});
    fake.iterations.push_back(rec);
  }
  EXPECT_EQ(implied_flow(fake, inst, 0), (std::vector<double>{0.25, 0.75}));
  fake.iterations.resize(1);
  EXPECT_EQ(implied_flow(fake, inst, 0), (std::vector<double>{0.25, 0.75}));
}

TEST(Concentration, Examples) {
  const Graph g = gnp_graph(10, 0.3, 1);
  const auto inst = build_spanner_instance(g, 2);
  const auto c = SolverConfig::make(0.5, 10, inst.demands.max_path_length, 1);
  const auto all = concentration_report(std::vector<int>(10, c.t), inst, c);
  EXPECT_TRUE(all.all_sources_pass);
  EXPECT_DOUBLE_EQ(all.node_pass_fraction, 1.0);
  EXPECT_DOUBLE_EQ(all.threshold, c.t / 1.5);

  std::vector<int> counts(10, c.t);
  const NodeId src = inst.demands.pairs[0].source;
  counts[static_cast<std::size_t>(src)] = 0;
  const auto bad = concentration_report(counts, inst, c);
  EXPECT_FALSE(bad.all_sources_pass);
  EXPECT_FALSE(bad.node_pass[static_cast<std::size_t>(src)]);
  EXPECT_DOUBLE_EQ(bad.node_pass_fraction, 0.9);
  EXPECT_EQ(bad.sources_passing, bad.sources - 1);

  // exactly at the threshold fails: the inequality is strict
  SolverConfig three = c;
  three.t = 3;
  three.epsilon = 0.5;
  EXPECT_FALSE(concentration_report(std::vector<int>(10, 2), inst, three).node_pass[0]);
}
