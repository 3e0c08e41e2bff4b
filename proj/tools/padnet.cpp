// padnet command line: decompose, solve-cp, round, experiment, verify.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "padnet/cp_solver.hpp"
#include "padnet/distributed_cp.hpp"
#include "padnet/error.hpp"
#include "padnet/experiment.hpp"
#include "padnet/padded_decomposition.hpp"
#include "padnet/rounding.hpp"
#include "padnet/text.hpp"

namespace fs = std::filesystem;
using namespace padnet;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheck = 1;
constexpr int kExitUsage = 2;

struct Args {
  std::string graph;
  std::string gen = "gnp";
  int n = 16;
  double p = 0.3;
  int rows = 4;
  int cols = 4;
  bool undirected = false;
  int k = 2;
  double epsilon = 0.5;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string problem = "spanner";
  std::string objective;
  std::string demands;
  bool parallel = false;
};

void add_graph_options(CLI::App* cmd, Args& a) {
  cmd->add_option("--graph", a.graph, "graph file ('n m directed|undirected' then 'u v' lines)");
  cmd->add_option("--gen", a.gen, "generator when no --graph: gnp, grid or cycle");
  cmd->add_option("--n", a.n, "node count (gnp, cycle)");
  cmd->add_option("--p", a.p, "edge probability (gnp)");
  cmd->add_option("--rows", a.rows, "grid rows");
  cmd->add_option("--cols", a.cols, "grid columns");
  cmd->add_flag("--undirected", a.undirected, "generate an undirected graph");
  cmd->add_option("--seed", a.seed, "random seed")->required();
}

void add_problem_options(CLI::App* cmd, Args& a) {
  cmd->add_option("--problem", a.problem, "spanner, low-degree-spanner, dsn or raw-cp");
  cmd->add_option("--k", a.k, "stretch");
  cmd->add_option("--objective", a.objective, "linear, max-degree[:out|in|inout], p-norm:<p|inf>");
  cmd->add_option("--demands", a.demands, "demand file, one 'u v L' per line");
}

std::vector<Demand> read_demands(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open demand file " + path);
  std::vector<Demand> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Demand d{};
    if (!(ls >> d.source >> d.target >> d.length_bound)) throw InputError("bad demand line '" + line + "'");
    out.push_back(d);
  }
  return out;
}

ExperimentConfig make_config(const Args& a) {
  ExperimentConfig c;
  c.problem = parse_problem_kind(a.problem);
  if (a.graph.empty()) {
    c.generator = parse_generator(a.gen);
    if (c.generator == GeneratorKind::File) throw ConfigError("--gen file needs --graph");
  } else {
    c.generator = GeneratorKind::File;
    c.graph_file = a.graph;
  }
  c.n = a.n;
  c.p = a.p;
  c.rows = a.rows;
  c.cols = a.cols;
  c.directed = !a.undirected;
  c.k = a.k;
  if (!a.objective.empty()) c.objective = Objective::parse(a.objective);
  if (!a.demands.empty()) c.demands = read_demands(a.demands);
  c.epsilon = a.epsilon;
  c.trials = a.trials;
  c.seed = a.seed;
  c.out_dir = a.out;
  c.execution = a.parallel ? Execution::Parallel : Execution::Serial;
  c.validate();
  return c;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  return f;
}

int cmd_decompose(const Args& a, int samples, bool distributed) {
  auto c = make_config(a);
  const Graph g = generate_graph(c, 0);
  const auto params = PaddedDecompositionParams::make(a.k, a.epsilon, g.node_count());
  const DistanceMatrix dist(g);
  std::vector<Clustering> runs;
  if (distributed) {
    SimOptions sim;
    sim.execution = c.execution;
    sim.phase = SimPhase::Decomposition;
    auto dd = sample_decompositions_distributed(g, params, a.seed, static_cast<std::size_t>(samples), sim);
    runs = std::move(dd.runs);
    std::cout << "rounds " << dd.transcript.rounds_elapsed << '\n';
  } else {
    runs = sample_decompositions_centralized(dist, params, a.seed, static_cast<std::size_t>(samples),
                                             PermutationMode::Random, c.execution);
  }
  const double bound = 2.0 * params.radius_cap;
  bool ok = true;
  std::vector<int> padded(static_cast<std::size_t>(g.node_count()), 0);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    check_clustering(runs[i], params, dist);
    const auto diam = cluster_diameters(runs[i], dist);
    const int worst = diam.empty() ? 0 : *std::max_element(diam.begin(), diam.end());
    if (worst > bound) ok = false;
    for (NodeId u = 0; u < g.node_count(); ++u) {
      padded[static_cast<std::size_t>(u)] += is_padded(runs[i], u, a.k, dist) ? 1 : 0;
    }
    if (!a.out.empty()) {
      auto f = open_out(fs::path(a.out) / ("clustering_" + std::to_string(i) + ".csv"));
      write_clustering_csv(f, runs[i]);
    }
  }
  const int min_padded = padded.empty() ? 0 : *std::min_element(padded.begin(), padded.end());
  std::cout << "samples " << runs.size() << "\ndiameter_bound " << format_real(bound)
            << "\nmin_padded_fraction " << format_real(static_cast<double>(min_padded) / samples)
            << "\ndiameter_check " << (ok ? "pass" : "fail") << '\n';
  return ok ? kExitPass : kExitCheck;
}

void write_x_csv(std::ostream& out, const Graph& g, const EdgeVector& x) {
  out << "edge,from,to,x\n";
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    out << e << ',' << g.edge(e).from << ',' << g.edge(e).to << ',' << format_real(x[e]) << '\n';
  }
}

EdgeVector read_x_csv(const std::string& path, const Graph& g) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  EdgeVector x(static_cast<std::size_t>(g.edge_count()));
  std::vector<char> seen(static_cast<std::size_t>(g.edge_count()), 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    EdgeId e = 0;
    NodeId u = 0;
    NodeId v = 0;
    double val = 0.0;
    if (!(ls >> e >> u >> v >> val) || e < 0 || e >= g.edge_count() || g.edge(e) != Edge{u, v}) {
      throw InputError("x file does not match the graph at '" + line + "'");
    }
    x.set(e, val);
    seen[static_cast<std::size_t>(e)] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw InputError("x file misses edges");
  return x;
}

int cmd_solve(const Args& a) {
  auto c = make_config(a);
  auto gen = generate_instance(c, 0);
  const Graph& g = gen.graph;
  const CpInstance& inst = gen.instance;
  ProgramCache cache;
  auto oracle = std::make_shared<const CpSolution>(solve_global_oracle(g, inst));
  cache.insert(all_demands(inst), oracle);
  const auto cfg = SolverConfig::make(a.epsilon, g.node_count(), inst.demands.max_path_length, a.seed);
  DistributedOptions opts;
  opts.execution = c.execution;
  opts.cache = &cache;
  const auto res = solve_distributed(g, inst, cfg, opts);
  const auto conc = concentration_report(res.padded_count, inst, cfg);
  const auto feas = check_feasibility(g, inst, res.x, 1e-9, c.execution);
  const bool bound = res.objective <= (1.0 + a.epsilon) * oracle->objective + 1e-6;
  std::cout << "objective " << inst.objective.to_string() << "\ncp_star " << format_real(oracle->objective)
            << "\ng_tilde " << format_real(res.objective) << "\nt " << cfg.t << "\nrounds "
            << res.transcript.rounds_elapsed << "\nround_bound " << format_real(cfg.round_bound(g.node_count()))
            << "\nconcentration " << (conc.all_sources_pass ? "pass" : "fail") << "\nfeasible "
            << (feas.feasible ? "yes" : "no") << "\nwithin_bound " << (bound ? "yes" : "no") << '\n';
  if (!a.out.empty()) {
    auto f = open_out(fs::path(a.out) / "x.csv");
    write_x_csv(f, g, res.x);
    auto h = open_out(fs::path(a.out) / "x_oracle.csv");
    write_x_csv(h, g, oracle->x);
  }
  if (conc.all_sources_pass && !(bound && feas.feasible)) return kExitCheck;
  return kExitPass;
}

int report_stretch(const StretchReport& rep, const CpInstance& inst) {
  for (int d : rep.violated) {
    const auto& dem = inst.demands.pairs[static_cast<std::size_t>(d)];
    std::cout << "violated " << dem.source << ' ' << dem.target << ' ' << dem.length_bound << '\n';
  }
  std::cout << "stretch " << (rep.valid ? "valid" : "invalid") << '\n';
  return rep.valid ? kExitPass : kExitCheck;
}

int cmd_round(const Args& a, const std::string& x_path, std::uint64_t trial) {
  auto c = make_config(a);
  auto gen = generate_instance(c, 0);
  const Graph& g = gen.graph;
  const CpInstance& inst = gen.instance;
  const EdgeVector x = read_x_csv(x_path, g);
  const RoundingKey key{a.seed, trial};
  std::vector<EdgeId> kept;
  if (c.problem == ProblemKind::LowDegreeSpanner) {
    kept = round_low_degree(g, x, a.k, key);
  } else {
    const int depth = c.problem == ProblemKind::DirectedSpanner ? a.k : inst.demands.max_length_bound;
    SimOptions sim;
    sim.execution = c.execution;
    const auto dr = round_spanner_distributed(g, x, depth, key, sim);
    kept = dr.output.edges;
    std::cout << "rounds " << dr.transcript.rounds_elapsed << "\nroots " << dr.output.roots.size() << '\n';
    if (!a.out.empty()) {
      auto f = open_out(fs::path(a.out) / "provenance.csv");
      write_provenance_csv(f, g, dr.output);
    }
  }
  std::cout << "edges " << kept.size() << '\n';
  if (!a.out.empty()) {
    auto f = open_out(fs::path(a.out) / "subgraph.txt");
    write_edge_subset(f, g, kept);
  }
  return report_stretch(verify_stretch(g, kept, inst), inst);
}

int cmd_experiment(const Args& a, int retries) {
  auto c = make_config(a);
  c.max_retries = retries;
  const auto report = run_experiment(c);
  std::cout << "trials " << report.trials.size() << "\nmean_ratio " << format_real(report.mean_ratio())
            << "\nmax_ratio " << format_real(report.max_ratio()) << "\nconcentration_fraction "
            << format_real(report.concentration_fraction()) << "\nstretch_fraction "
            << format_real(report.stretch_fraction()) << "\nchecks " << (report.checks_pass() ? "pass" : "fail")
            << '\n';
  return report.checks_pass() ? kExitPass : kExitCheck;
}

int cmd_verify(const Args& a, const std::string& subgraph) {
  auto c = make_config(a);
  auto gen = generate_instance(c, 0);
  const Graph& g = gen.graph;
  const Graph h = load_graph(subgraph);
  if (h.node_count() != g.node_count()) throw InputError("subgraph has a different node count");
  std::vector<EdgeId> kept;
  for (const auto& e : h.edges()) {
    const auto found = g.find_edge(e.from, e.to);
    if (!found) {
      throw InputError("subgraph edge " + std::to_string(e.from) + ' ' + std::to_string(e.to) + " not in graph");
    }
    kept.push_back(*found);
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return report_stretch(verify_stretch(g, kept, gen.instance), gen.instance);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"padded-decomposition network design toolkit"};
  app.require_subcommand(1);
  Args a;

  auto* dec = app.add_subcommand("decompose", "sample padded decompositions and check them");
  add_graph_options(dec, a);
  int samples = 1;
  bool distributed = false;
  dec->add_option("--k", a.k, "padding radius");
  dec->add_option("--epsilon", a.epsilon, "padding failure probability");
  dec->add_option("--samples", samples, "number of decompositions")->check(CLI::PositiveNumber);
  dec->add_flag("--distributed", distributed, "use the flooding protocol");
  dec->add_option("--out", a.out, "directory for clustering CSVs");
  dec->add_flag("--parallel", a.parallel, "parallel kernels");

  auto* solve = app.add_subcommand("solve-cp", "distributed CP solve compared with the global optimum");
  add_graph_options(solve, a);
  add_problem_options(solve, a);
  solve->add_option("--epsilon", a.epsilon, "approximation parameter in (0, 1)");
  solve->add_option("--out", a.out, "directory for x.csv");
  solve->add_flag("--parallel", a.parallel, "parallel kernels");

  auto* round = app.add_subcommand("round", "round a fractional solution and verify stretch");
  add_graph_options(round, a);
  add_problem_options(round, a);
  std::string x_path;
  std::uint64_t trial = 0;
  round->add_option("--x", x_path, "x.csv written by solve-cp")->required();
  round->add_option("--trial", trial, "rounding trial key");
  round->add_option("--out", a.out, "directory for subgraph.txt and provenance.csv");
  round->add_flag("--parallel", a.parallel, "parallel kernels");

  auto* exp = app.add_subcommand("experiment", "seeded trials of the full pipeline");
  add_graph_options(exp, a);
  add_problem_options(exp, a);
  int retries = 3;
  exp->add_option("--epsilon", a.epsilon, "approximation parameter in (0, 1)");
  exp->add_option("--trials", a.trials, "number of trials");
  exp->add_option("--retries", retries, "reruns after a failed concentration event");
  exp->add_option("--out", a.out, "report directory");
  exp->add_flag("--parallel", a.parallel, "run trials concurrently");

  auto* ver = app.add_subcommand("verify", "check a subgraph against the instance demands");
  add_graph_options(ver, a);
  add_problem_options(ver, a);
  std::string subgraph;
  ver->add_option("--subgraph", subgraph, "edge subset file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*dec) return cmd_decompose(a, samples, distributed);
    if (*solve) return cmd_solve(a);
    if (*round) return cmd_round(a, x_path, trial);
    if (*exp) return cmd_experiment(a, retries);
    if (*ver) return cmd_verify(a, subgraph);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheck;
  }
  return kExitUsage;
}
