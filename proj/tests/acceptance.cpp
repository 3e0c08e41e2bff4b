// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "padnet/cp_solver.hpp"
#include "padnet/distributed_cp.hpp"
#include "padnet/experiment.hpp"
#include "padnet/generators.hpp"
#include "padnet/padded_decomposition.hpp"
#include "padnet/rounding.hpp"

using namespace padnet;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Verdict> verdicts;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  verdicts.push_back({id, name, pass, detail});
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << ' ' << name << ": " << detail << std::endl;
}

std::string num(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

int max_diameter(const Clustering& c, const DistanceMatrix& dm) {
  const auto d = cluster_diameters(c, dm);
  return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

// Criterion 2 accumulates over every clustering sampled anywhere below.
struct DiameterTally {
  long clusterings = 0;
  long violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();  // bound - diameter

  void add(const Clustering& c, const DistanceMatrix& dm, const PaddedDecompositionParams& p) {
    ++clusterings;
    const double bound = 2.0 * ((2.0 * p.k / p.epsilon) * std::log(static_cast<double>(p.n)) + p.k);
    const int d = max_diameter(c, dm);
    if (d > bound) ++violations;
    worst_slack = std::min(worst_slack, bound - d);
  }
};

DiameterTally diameters;

// Criterion 6 accumulates over every solver and rounding transcript.
struct RoundTally {
  long solver_runs = 0;
  long solver_violations = 0;
  double solver_worst = 0.0;  // max rounds / bound
  long rounding_runs = 0;
  long rounding_violations = 0;
  int rounding_max = 0;
};

RoundTally rounds;

// ---- 1: padding probability ------------------------------------------------

std::vector<std::pair<std::string, Graph>> padding_graphs() {
  return {{"cycle(32)", cycle_graph(32)},
          {"grid(6x6)", grid_graph(6, 6)},
          {"G(32,0.2)", gnp_graph(32, 0.2, 1001)}};
}

void criterion_padding() {
  const int samples = 2000;
  bool pass = true;
  std::ostringstream detail;
  double slowest = 0.0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string worst_where;
  for (const auto& [name, g] : padding_graphs()) {
    const DistanceMatrix dm(g);
    for (const auto& [k, eps] : std::vector<std::pair<int, double>>{{1, 0.5}, {2, 0.25}}) {
      const auto start = Clock::now();
      const auto params = PaddedDecompositionParams::make(k, eps, g.node_count());
      const auto runs = sample_decompositions_centralized(dm, params, 7000 + static_cast<std::uint64_t>(k), samples,
                                                          PermutationMode::Random, Execution::Parallel);
      const double threshold = 1.0 - eps - 3.0 * std::sqrt(eps / samples);
      double lowest = 1.0;
      for (NodeId u = 0; u < g.node_count(); ++u) {
        int hit = 0;
        for (const auto& c : runs) hit += is_padded(c, u, k, dm);
        lowest = std::min(lowest, static_cast<double>(hit) / samples);
      }
      for (const auto& c : runs) diameters.add(c, dm, params);
      const double took = seconds_since(start);
      slowest = std::max(slowest, took);
      if (lowest < threshold || took >= 60.0) pass = false;
      if (lowest - threshold < worst_margin) {
        worst_margin = lowest - threshold;
        worst_where = name + " k=" + std::to_string(k) + " eps=" + num(eps) + " min freq " + num(lowest) +
                      " vs " + num(threshold);
      }
    }
  }
  detail << "6 settings x " << samples << " samples; tightest " << worst_where << "; slowest setting "
         << num(slowest, 3) << "s";
  report(1, "padding probability", pass, detail.str());
}

// ---- 3: distributed == centralized in id order -------------------------------

void criterion_equivalence() {
  struct Case {
    Graph g;
    int k;
    double eps;
  };
  std::vector<Case> cases;
  cases.push_back({gnp_graph(64, 0.05, 31), 1, 0.5});
  cases.push_back({grid_graph(8, 8), 2, 0.5});
  cases.push_back({cycle_graph(64), 1, 0.25});
  cases.push_back({gnp_graph(48, 0.08, 32), 2, 0.5});
  cases.push_back({gnp_graph(40, 0.1, 33, false), 1, 0.5});
  const std::size_t per_case = 20;
  int runs = 0;
  int mismatches = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& cs = cases[i];
    const DistanceMatrix dm(cs.g);
    const auto params = PaddedDecompositionParams::make(cs.k, cs.eps, cs.g.node_count());
    const std::uint64_t seed = 500 + i;
    const auto dist = sample_decompositions_distributed(cs.g, params, seed, per_case);
    for (std::size_t r = 0; r < per_case; ++r) {
      CentralizedOptions opt;
      opt.permutation = PermutationMode::IdOrder;
      opt.iteration = r;
      const auto cen = sample_decomposition_centralized(dm, params, seed, opt);
      ++runs;
      if (cen.assignment != dist.runs[r].assignment || cen.centers != dist.runs[r].centers) ++mismatches;
      diameters.add(dist.runs[r], dm, params);
    }
  }
  report(3, "distributed/centralized equivalence", runs == 100 && mismatches == 0,
         std::to_string(runs) + " runs on n<=64, " + std::to_string(mismatches) + " assignment mismatches");
}

// ---- 4, 9b: approximation and per-cluster optimality ---------------------------

struct CpRunTally {
  int runs = 0;
  int within = 0;
  int conc_runs = 0;
  int conc_within = 0;
  int conc_feasible = 0;
  int feasible_without_conc = 0;
  double max_ratio = 0.0;
  long lemma5_clusters = 0;
  long lemma5_violations = 0;
  double lemma5_worst = -std::numeric_limits<double>::infinity();  // local - restricted
};

CpRunTally cp_runs;

void solve_and_check(const Graph& g, const CpInstance& inst, double eps, std::uint64_t seed, ProgramCache& cache,
                     const CpSolution& oracle_solution, const DistanceMatrix& dm) {
  const int n = g.node_count();
  const auto config = SolverConfig::make(eps, n, inst.demands.max_path_length, seed);
  DistributedOptions opt;
  opt.cache = &cache;
  const auto res = solve_distributed(g, inst, config, opt);
  const double cp_star = oracle_solution.objective;
  const bool within = res.objective <= (1.0 + eps) * cp_star + 1e-6;
  const auto conc = concentration_report(res.padded_count, inst, config);
  const bool feasible = check_feasibility(g, inst, res.x).feasible;
  ++cp_runs.runs;
  cp_runs.within += within;
  cp_runs.max_ratio = std::max(cp_runs.max_ratio, cp_star > 0 ? res.objective / cp_star : 1.0);
  if (conc.all_sources_pass) {
    ++cp_runs.conc_runs;
    cp_runs.conc_within += within;
    cp_runs.conc_feasible += feasible;
  } else if (feasible) {
    ++cp_runs.feasible_without_conc;
  }

  ++rounds.solver_runs;
  const double bound = config.round_bound(n);
  if (res.transcript.rounds_elapsed > bound) ++rounds.solver_violations;
  rounds.solver_worst = std::max(rounds.solver_worst, res.transcript.rounds_elapsed / bound);

  const auto params = config.decomposition(n);
  for (const auto& it : res.iterations) {
    diameters.add(it.clustering, dm, params);
    const auto members = it.clustering.members();
    for (std::size_t c = 0; c < it.clusters.size(); ++c) {
      const double restricted =
          evaluate_objective(inst.objective, restrict_to(oracle_solution.x, members[c], g), g);
      const double diff = it.clusters[c].solution->objective - restricted;
      ++cp_runs.lemma5_clusters;
      if (diff > 1e-9) ++cp_runs.lemma5_violations;
      cp_runs.lemma5_worst = std::max(cp_runs.lemma5_worst, diff);
    }
  }
}

void run_instance_both_eps(const GeneratedInstance& gen, std::uint64_t seed) {
  const DistanceMatrix dm(gen.graph);
  const auto oracle_solution = solve_global_oracle(gen.graph, gen.instance);
  ProgramCache cache;
  cache.insert(all_demands(gen.instance), std::make_shared<const CpSolution>(oracle_solution));
  for (double eps : {0.5, 0.25}) {
    solve_and_check(gen.graph, gen.instance, eps, seed + static_cast<std::uint64_t>(eps * 1000), cache,
                    oracle_solution, dm);
  }
}

void criterion_approximation() {
  const auto start = Clock::now();
  for (int n : {16, 24}) {
    ExperimentConfig c;
    c.problem = ProblemKind::DirectedSpanner;
    c.n = n;
    c.p = 0.3;
    c.k = 2;
    c.seed = 4000 + static_cast<std::uint64_t>(n);
    for (int i = 0; i < 10; ++i) run_instance_both_eps(generate_instance(c, i), 90000 + 100 * n + i);
  }
  ExperimentConfig dsn;
  dsn.problem = ProblemKind::Dsn;
  dsn.n = 16;
  dsn.p = 0.3;
  dsn.seed = 4100;
  for (int i = 0; i < 10; ++i) {
    const auto gen = generate_instance(dsn, i);
    if (!gen.instance.demands.spanning) throw InternalError("dsn instance without spanning demands");
    run_instance_both_eps(gen, 95000 + i);
  }
  const double took = seconds_since(start);
  const auto& t = cp_runs;
  const bool pass = t.runs == 60 && t.within >= 0.95 * t.runs && t.conc_within == t.conc_runs &&
                    t.conc_feasible == t.conc_runs && took < 300.0;
  std::ostringstream d;
  d << t.runs << " runs; bound held in " << t.within << "; concentration passed in " << t.conc_runs
    << ", of which bound " << t.conc_within << " and feasible " << t.conc_feasible
    << "; feasible without concentration " << t.feasible_without_conc << "; max ratio " << num(t.max_ratio, 6)
    << "; " << num(took, 3) << "s";
  report(4, "approximation bound", pass, d.str());
}

// ---- 5: concentration -------------------------------------------------------

void criterion_concentration() {
  const auto start = Clock::now();
  const int n = 64;
  const int runs = 100;
  const int instances = 4;
  long pairs = 0;
  long passing = 0;
  int all_pass_runs = 0;
  for (int i = 0; i < instances; ++i) {
    const Graph g = gnp_graph(n, 0.1, 6000 + static_cast<std::uint64_t>(i));
    const auto inst = build_spanner_instance(g, 2);
    for (int r = 0; r < runs / instances; ++r) {
      const auto config =
          SolverConfig::make(0.5, n, inst.demands.max_path_length, 61000 + static_cast<std::uint64_t>(i * 1000 + r));
      const auto probe = decompose_and_probe(g, config);
      std::vector<int> count(static_cast<std::size_t>(n), 0);
      for (const auto& run : probe.padded) {
        for (std::size_t u = 0; u < count.size(); ++u) count[u] += run[u];
      }
      const auto rep = concentration_report(count, inst, config);
      for (char ok : rep.node_pass) {
        ++pairs;
        passing += ok;
      }
      all_pass_runs += rep.node_pass_fraction == 1.0;
    }
  }
  const double q = 2.0 / (n * n);
  const double sigma = std::sqrt(q * (1 - q) / static_cast<double>(pairs));
  const double threshold = 1.0 - q - 3.0 * sigma;
  const double frac = static_cast<double>(passing) / static_cast<double>(pairs);
  std::ostringstream d;
  d << runs << " runs at n=64 (" << pairs << " pairs): pass fraction " << num(frac, 6) << " vs " << num(threshold, 6)
    << "; runs with every node passing " << all_pass_runs << "; " << num(seconds_since(start), 3) << "s";
  report(5, "concentration", frac >= threshold, d.str());
}

// ---- 7: rounding size and validity -------------------------------------------

void criterion_rounding() {
  const auto start = Clock::now();
  const int k = 2;
  bool pass = true;
  std::ostringstream d;
  double worst_c = 0.0;
  for (const auto& [n, p] : std::vector<std::pair<int, double>>{{16, 0.4}, {32, 0.2}, {64, 0.1}}) {
    int runs = 0;
    int valid = 0;
    double max_c = 0.0;
    double sum_c = 0.0;
    for (int inst_i = 0; inst_i < 2; ++inst_i) {
      const std::uint64_t seed = 8000 + static_cast<std::uint64_t>(n * 10 + inst_i);
      const Graph g = gnp_graph(n, p, seed);
      const auto inst = build_spanner_instance(g, k);
      const auto oracle_solution = solve_global_oracle(g, inst);
      ProgramCache cache;
      cache.insert(all_demands(inst), std::make_shared<const CpSolution>(oracle_solution));
      const auto config = SolverConfig::make(0.5, n, inst.demands.max_path_length, seed + 1);
      DistributedOptions opt;
      opt.cache = &cache;
      const auto res = solve_distributed(g, inst, config, opt);
      ++rounds.solver_runs;
      if (res.transcript.rounds_elapsed > config.round_bound(n)) ++rounds.solver_violations;
      rounds.solver_worst = std::max(rounds.solver_worst, res.transcript.rounds_elapsed / config.round_bound(n));
      const double scale = std::sqrt(n) * std::log(n) * (n + oracle_solution.objective);
      for (std::uint64_t key = 0; key < 25; ++key) {
        const auto out = round_spanner_distributed(g, res.x, k, {seed, key});
        ++rounds.rounding_runs;
        if (out.transcript.rounds_elapsed > 2 * k + 5) ++rounds.rounding_violations;
        rounds.rounding_max = std::max(rounds.rounding_max, out.transcript.rounds_elapsed);
        ++runs;
        valid += verify_stretch(g, out.output.edges, inst).valid;
        const double c = static_cast<double>(out.output.edges.size()) / scale;
        max_c = std::max(max_c, c);
        sum_c += c;
      }
    }
    const double frac = static_cast<double>(valid) / runs;
    if (frac < 0.95 || max_c > 2.0) pass = false;
    worst_c = std::max(worst_c, max_c);
    d << "n=" << n << ": valid " << valid << "/" << runs << ", c mean " << num(sum_c / runs) << " max "
      << num(max_c) << "; ";
  }
  d << num(seconds_since(start), 3) << "s";
  report(7, "rounding size and validity", pass, d.str());
}

// ---- 8: objective algebra -----------------------------------------------------

void criterion_objectives() {
  const std::vector<std::pair<std::string, Objective>> kinds = {
      {"linear", Objective::linear_sum()},
      {"max-degree", Objective::max_degree(DegreeMode::InOut)},
      {"p=1", Objective::p_norm(1.0)},
      {"p=2", Objective::p_norm(2.0)},
      {"p=inf", Objective::p_norm(std::numeric_limits<double>::infinity())}};
  RngStream rng(8800, StreamTag::Trial, 0, 0);
  long checks = 0;
  long failures = 0;
  double worst = 0.0;
  for (const auto& [name, obj] : kinds) {
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 6 + static_cast<int>(rng.below(15));
      const Graph g = gnp_graph(n, 0.25, rng.next(), trial % 2 == 0);
      const auto m = static_cast<std::size_t>(g.edge_count());
      const int parts = 1 + static_cast<int>(rng.below(4));
      std::vector<int> cluster(static_cast<std::size_t>(n));
      for (auto& c : cluster) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(parts)));

      // partition identity on a vector that is zero across clusters
      std::vector<double> x(m, 0.0);
      for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const auto& ed = g.edge(e);
        if (cluster[static_cast<std::size_t>(ed.from)] == cluster[static_cast<std::size_t>(ed.to)]) {
          x[static_cast<std::size_t>(e)] = rng.uniform() * 2.0;
        }
      }
      std::vector<double> values;
      for (int c = 0; c < parts; ++c) {
        std::vector<NodeId> members;
        for (NodeId v = 0; v < n; ++v) {
          if (cluster[static_cast<std::size_t>(v)] == c) members.push_back(v);
        }
        values.push_back(evaluate_objective(obj, restrict_to(EdgeVector(x), members, g), g));
      }
      const double whole = evaluate_objective(obj, x, g);
      const double rel = std::abs(combiner_value(obj, values) - whole) / std::max(1.0, std::abs(whole));
      worst = std::max(worst, rel);
      ++checks;
      if (rel > 1e-12) ++failures;

      // monotonicity on an arbitrary vector and its entrywise increase
      std::vector<double> y(m);
      for (auto& v : y) v = rng.uniform();
      std::vector<double> z = y;
      for (auto& v : z) v += rng.uniform();
      ++checks;
      if (evaluate_objective(obj, y, g) > evaluate_objective(obj, z, g)) ++failures;

      // g(0) = 0
      ++checks;
      if (evaluate_objective(obj, std::vector<double>(m, 0.0), g) != 0.0) ++failures;
    }
  }
  report(8, "objective algebra", failures == 0,
         std::to_string(checks) + " checks over 5 objective kinds, " + std::to_string(failures) +
             " failures, worst partition residual " + num(worst, 3));
}

// ---- 9: LP oracle and per-cluster optimality ---------------------------------

void criterion_lp() {
  RngStream rng(9900, StreamTag::Trial, 0, 0);
  int compared = 0;
  int mismatches = 0;
  int infeasible = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int nv = 2 + static_cast<int>(rng.below(11));
    const int rows = 1 + static_cast<int>(rng.below(6));
    const auto lp = oracle::random_lp(rng, nv, rows, trial % 3 == 0);
    const auto ref = oracle::enumerate_vertices(lp);
    const auto got = solve_lp(lp);
    ++compared;
    if (!ref.feasible) {
      ++infeasible;
      if (got.status != LpStatus::Infeasible) ++mismatches;
      continue;
    }
    if (got.status != LpStatus::Optimal) {
      ++mismatches;
      continue;
    }
    const double err = std::abs(got.objective - ref.objective) / (1.0 + std::abs(ref.objective));
    worst = std::max(worst, err);
    if (err > 1e-9) ++mismatches;
  }
  const auto& t = cp_runs;
  const bool pass = mismatches == 0 && t.lemma5_clusters > 0 && t.lemma5_violations == 0;
  std::ostringstream d;
  d << compared << " LPs (" << infeasible << " infeasible), " << mismatches << " mismatches, worst relative error "
    << num(worst, 3) << "; per-cluster check over " << t.lemma5_clusters << " clusters in criterion-4 runs, "
    << t.lemma5_violations << " violations, max g(local) - g(restricted) " << num(t.lemma5_worst, 3);
  report(9, "LP oracle equivalence", pass, d.str());
}

// ---- 10: determinism ----------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void criterion_determinism() {
  const auto root = fs::temp_directory_path() / "padnet_acceptance";
  fs::remove_all(root);
  std::vector<ExperimentConfig> configs(3);
  configs[0].problem = ProblemKind::DirectedSpanner;
  configs[0].n = 16;
  configs[1].problem = ProblemKind::Dsn;
  configs[1].n = 14;
  configs[2].problem = ProblemKind::LowDegreeSpanner;
  configs[2].n = 12;
  int compared = 0;
  int differing = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    auto& c = configs[i];
    c.p = 0.3;
    c.trials = 3;
    c.seed = 10000 + i;
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 3; ++rep) {
      dirs.push_back(root / (std::to_string(i) + "_" + std::to_string(rep)));
      c.out_dir = dirs.back().string();
      c.execution = rep == 2 ? Execution::Parallel : Execution::Serial;
      run_experiment(c);
    }
    for (const char* f : {"manifest.json", "trials.csv", "summary.csv", "transcripts.csv"}) {
      const auto ref = slurp(dirs[0] / f);
      for (std::size_t r = 1; r < dirs.size(); ++r) {
        ++compared;
        if (ref.empty() || ref != slurp(dirs[r] / f)) ++differing;
      }
    }
  }
  fs::remove_all(root);
  report(10, "determinism", differing == 0,
         std::to_string(compared) + " report files compared across reruns and serial/parallel schedules, " +
             std::to_string(differing) + " differ");
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const auto guarded = [](int id, const char* name, void (*fn)()) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, name, false, std::string("exception: ") + e.what());
    }
  };
  guarded(1, "padding probability", criterion_padding);
  guarded(3, "distributed/centralized equivalence", criterion_equivalence);
  guarded(4, "approximation bound", criterion_approximation);
  guarded(5, "concentration", criterion_concentration);
  guarded(7, "rounding size and validity", criterion_rounding);

  report(2, "diameter bound", diameters.clusterings > 0 && diameters.violations == 0,
         std::to_string(diameters.clusterings) + " clusterings, " + std::to_string(diameters.violations) +
             " over the bound, smallest slack " + num(diameters.worst_slack, 4));
  report(6, "round complexity",
         rounds.solver_runs > 0 && rounds.rounding_runs > 0 && rounds.solver_violations == 0 &&
             rounds.rounding_violations == 0,
         std::to_string(rounds.solver_runs) + " solver transcripts, max rounds/bound " +
             num(rounds.solver_worst, 4) + ", " + std::to_string(rounds.solver_violations) + " over; " +
             std::to_string(rounds.rounding_runs) + " rounding transcripts, max " +
             std::to_string(rounds.rounding_max) + " rounds vs 9, " + std::to_string(rounds.rounding_violations) +
             " over");

  guarded(8, "objective algebra", criterion_objectives);
  guarded(9, "LP oracle equivalence", criterion_lp);
  guarded(10, "determinism", criterion_determinism);

  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  int failed = 0;
  std::cout << "\nsummary (" << num(seconds_since(start), 4) << "s):\n";
  for (const auto& v : verdicts) {
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << v.id << ' ' << v.name << '\n';
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
