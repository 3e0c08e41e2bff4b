#include "padnet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>

#include "json.hpp"
#include "padnet/cp_solver.hpp"
#include "padnet/distributed_cp.hpp"
#include "padnet/error.hpp"
#include "padnet/padded_decomposition.hpp"
#include "padnet/rng.hpp"
#include "padnet/rounding.hpp"
#include "padnet/text.hpp"

namespace padnet {

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Gnp:
      return "gnp";
    case GeneratorKind::Grid:
      return "grid";
    case GeneratorKind::Cycle:
      return "cycle";
    case GeneratorKind::File:
      return "file";
  }
  return "?";
}

GeneratorKind parse_generator(const std::string& text) {
  for (auto kind : {GeneratorKind::Gnp, GeneratorKind::Grid, GeneratorKind::Cycle, GeneratorKind::File}) {
    if (to_string(kind) == text) return kind;
  }
  throw ConfigError("unknown generator '" + text + "'");
}

void ExperimentConfig::validate() const {
  if (!seed) {
    throw ConfigError("a seed is required");
  }
  switch (generator) {
    case GeneratorKind::Gnp:
      if (n < 2) throw ConfigError("n must be at least 2");
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p must lie in [0, 1]");
      break;
    case GeneratorKind::Cycle:
      if (n < 3) throw ConfigError("a cycle needs at least 3 nodes");
      break;
    case GeneratorKind::Grid:
      if (rows < 1 || cols < 1 || rows * cols < 2) throw ConfigError("grid needs at least 2 nodes");
      break;
    case GeneratorKind::File:
      if (graph_file.empty()) throw ConfigError("file generator needs a graph path");
      break;
  }
  if (k < 1) throw ConfigError("k must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (trials < 0) throw ConfigError("trials must be nonnegative");
  if (max_retries < 0) throw ConfigError("max_retries must be nonnegative");
  if (dsn.max_distance < 1 || dsn.slack < 0) throw ConfigError("bad demand sampling options");
}

Objective ExperimentConfig::resolved_objective() const {
  if (objective) return *objective;
  if (problem == ProblemKind::LowDegreeSpanner) return Objective::max_degree(DegreeMode::InOut);
  return Objective::linear_sum();
}

namespace {

constexpr int kGenerateAttempts = 10;
constexpr double kBoundTol = 1e-6;

std::uint64_t instance_seed(const ExperimentConfig& config, int trial) {
  return RngStream(*config.seed, StreamTag::Trial, static_cast<std::uint64_t>(trial), 0).next();
}

std::uint64_t solver_seed(const ExperimentConfig& config, int trial, int attempt) {
  return RngStream(*config.seed, StreamTag::Trial, static_cast<std::uint64_t>(trial),
                   static_cast<std::uint64_t>(attempt) + 1)
      .next();
}

Graph make_graph(const ExperimentConfig& config, std::uint64_t seed, int attempt) {
  switch (config.generator) {
    case GeneratorKind::Gnp:
      return gnp_graph(config.n, config.p, seed, config.directed, static_cast<std::uint64_t>(attempt));
    case GeneratorKind::Grid:
      return grid_graph(config.rows, config.cols, config.directed);
    case GeneratorKind::Cycle:
      return cycle_graph(config.n, config.directed);
    case GeneratorKind::File:
      return load_graph(config.graph_file);
  }
  throw InternalError("unhandled generator");
}

bool is_spanner(ProblemKind kind) {
  return kind == ProblemKind::DirectedSpanner || kind == ProblemKind::LowDegreeSpanner;
}

}  // namespace

Graph generate_graph(const ExperimentConfig& config, int trial) {
  config.validate();
  return make_graph(config, instance_seed(config, trial), 0);
}

GeneratedInstance generate_instance(const ExperimentConfig& config, int trial) {
  config.validate();
  const auto seed = instance_seed(config, trial);
  const auto objective = config.resolved_objective();
  std::string last;
  for (int attempt = 0; attempt < kGenerateAttempts; ++attempt) {
    Graph g = make_graph(config, seed, attempt);
    try {
      CpInstance inst;
      if (is_spanner(config.problem)) {
        inst = build_spanner_instance(g, config.k, objective);
      } else {
        auto demands = config.demands.empty()
                           ? spanning_demands(g, seed, static_cast<std::uint64_t>(attempt), config.dsn)
                           : config.demands;
        inst = build_dsn_instance(g, std::move(demands), objective);
      }
      inst.kind = config.problem;
      return {std::move(g), std::move(inst), attempt + 1};
    } catch (const InfeasibleDemandError& e) {
      last = e.what();
    }
  }
  throw InfeasibleDemandError("no usable instance after " + std::to_string(kGenerateAttempts) +
                              " attempts: " + last);
}

TrialReport run_trial(const ExperimentConfig& config, int trial) {
  auto gen = generate_instance(config, trial);
  const Graph& g = gen.graph;
  const CpInstance& inst = gen.instance;
  const int n = g.node_count();

  TrialReport rep;
  rep.trial = trial;
  rep.instance_seed = instance_seed(config, trial);
  rep.n = n;
  rep.m = g.edge_count();
  rep.demands = static_cast<int>(inst.demands.pairs.size());
  rep.max_path_length = inst.demands.max_path_length;
  rep.spanning = inst.demands.spanning;

  CpSolveOptions cp;
  ProgramCache cache;
  auto oracle = std::make_shared<const CpSolution>(solve_global_oracle(g, inst, cp));
  cache.insert(all_demands(inst), oracle);
  rep.cp_star = oracle->objective;

  DistributedOptions opts;
  opts.execution = config.execution;
  opts.cp = cp;
  opts.cache = &cache;

  DistributedResult result;
  SolverConfig solver;
  for (int attempt = 0;; ++attempt) {
    solver = SolverConfig::make(config.epsilon, n, inst.demands.max_path_length,
                                solver_seed(config, trial, attempt));
    result = solve_distributed(g, inst, solver, opts);
    const auto conc = concentration_report(result.padded_count, inst, solver);
    rep.attempts.push_back({solver.seed, conc.all_sources_pass, conc.node_pass_fraction});
    rep.concentration_ok = conc.all_sources_pass;
    rep.node_pass_fraction = conc.node_pass_fraction;
    if (conc.all_sources_pass || attempt >= config.max_retries) break;
  }

  rep.t = solver.t;
  rep.lambda = solver.lambda;
  rep.g_tilde = result.objective;
  if (rep.cp_star > 0.0) {
    rep.ratio = rep.g_tilde / rep.cp_star;
  } else {
    rep.ratio = rep.g_tilde > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  rep.within_bound = rep.g_tilde <= (1.0 + config.epsilon) * rep.cp_star + kBoundTol;

  const auto feas = check_feasibility(g, inst, result.x, 1e-9, config.execution);
  rep.feasible = feas.feasible;
  rep.min_achieved_flow = feas.achieved.empty() ? 1.0 : *std::min_element(feas.achieved.begin(), feas.achieved.end());
  try {
    rep.certificate_violation = certificate_violation(inst, result.x, implied_flows(result, inst));
    rep.certificate_available = true;
  } catch (const NoCertificateError&) {
    rep.certificate_available = false;
  }
  rep.distinct_programs = result.distinct_programs;

  const DistanceMatrix dist(g);
  for (const auto& it : result.iterations) {
    rep.cluster_counts.push_back(it.clustering.cluster_count());
    const auto diam = cluster_diameters(it.clustering, dist);
    rep.max_diameters.push_back(diam.empty() ? 0 : *std::max_element(diam.begin(), diam.end()));
  }
  rep.rounds = result.transcript.rounds_elapsed;
  rep.round_bound = solver.round_bound(n);
  rep.transcript = result.transcript;

  const RoundingKey key{rep.instance_seed, 0};
  std::vector<EdgeId> kept;
  if (config.problem == ProblemKind::LowDegreeSpanner) {
    kept = round_low_degree(g, result.x, config.k, key);
    // the owner tells the other endpoint: one round
    RoundTranscript tr;
    tr.charge(SimPhase::Rounding, 1);
    rep.rounding_rounds = 1;
    rep.transcript.append(tr);
    std::vector<int> degree(static_cast<std::size_t>(n), 0);
    for (EdgeId e : kept) {
      ++degree[static_cast<std::size_t>(g.edge(e).from)];
      ++degree[static_cast<std::size_t>(g.edge(e).to)];
    }
    rep.max_output_degree = degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
    rep.rounded = true;
  } else if (config.problem != ProblemKind::RawCp) {
    const int depth = config.problem == ProblemKind::Dsn ? inst.demands.max_length_bound : config.k;
    SimOptions sim;
    sim.execution = config.execution;
    auto dr = round_spanner_distributed(g, result.x, depth, key, sim);
    kept = dr.output.edges;
    rep.roots = static_cast<int>(dr.output.roots.size());
    rep.rounding_rounds = dr.transcript.rounds_elapsed;
    rep.transcript.append(dr.transcript);
    rep.rounded = true;
  }
  if (rep.rounded) {
    const auto stretch = verify_stretch(g, kept, inst);
    rep.output_edges = static_cast<int>(kept.size());
    rep.stretch_valid = stretch.valid;
    rep.violated_demands = static_cast<int>(stretch.violated.size());
  }
  rep.guarantee_void = config.problem == ProblemKind::Dsn && !inst.demands.spanning;
  return rep;
}

double RunReport::mean_ratio() const {
  if (trials.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : trials) sum += t.ratio;
  return sum / static_cast<double>(trials.size());
}

double RunReport::max_ratio() const {
  double best = 0.0;
  for (const auto& t : trials) best = std::max(best, t.ratio);
  return best;
}

double RunReport::concentration_fraction() const {
  if (trials.empty()) return 0.0;
  const auto pass = std::count_if(trials.begin(), trials.end(), [](const TrialReport& t) { return t.concentration_ok; });
  return static_cast<double>(pass) / static_cast<double>(trials.size());
}

double RunReport::stretch_fraction() const {
  int rounded = 0;
  int valid = 0;
  for (const auto& t : trials) {
    if (!t.rounded) continue;
    ++rounded;
    valid += t.stretch_valid ? 1 : 0;
  }
  return rounded == 0 ? 0.0 : static_cast<double>(valid) / static_cast<double>(rounded);
}

bool RunReport::checks_pass() const {
  for (const auto& t : trials) {
    if (t.concentration_ok && !(t.within_bound && t.feasible)) return false;
    if (t.feasible && t.ratio < 1.0 - kBoundTol) return false;
    if (t.rounds > t.round_bound) return false;
  }
  return true;
}

RunReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto count = static_cast<std::size_t>(config.trials);
  std::vector<TrialReport> done(count);
  std::vector<std::exception_ptr> errors(count);
  for_each_index(count, config.execution, [&](std::size_t i) {
    try {
      done[i] = run_trial(config, static_cast<int>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });

  RunReport report;
  report.config = config;
  std::size_t failed = count;
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) {
      failed = i;
      break;
    }
  }
  report.trials.assign(std::make_move_iterator(done.begin()),
                       std::make_move_iterator(done.begin() + static_cast<std::ptrdiff_t>(failed)));
  if (!config.out_dir.empty()) write_reports(config.out_dir, report);
  if (failed < count) {
    try {
      std::rethrow_exception(errors[failed]);
    } catch (const std::exception& e) {
      throw ExperimentError(static_cast<int>(failed), e.what());
    }
  }
  return report;
}

namespace {

const char* flag(bool b) { return b ? "1" : "0"; }

}  // namespace

void write_trials_csv(std::ostream& out, const RunReport& report) {
  out << "trial,instance_seed,n,m,demands,D,spanning,attempts,solver_seed,t,lambda,cp_star,g_tilde,ratio,"
         "within_bound,concentration_ok,node_pass_fraction,feasible,min_achieved_flow,"
         "certificate_available,certificate_violation,distinct_programs,min_clusters,max_clusters,"
         "max_cluster_diameter,rounds,round_bound,rounded,rounding_rounds,output_edges,roots,"
         "stretch_valid,violated_demands,max_output_degree,guarantee_void\n";
  for (const auto& t : report.trials) {
    const auto [lo, hi] = std::minmax_element(t.cluster_counts.begin(), t.cluster_counts.end());
    const int min_c = t.cluster_counts.empty() ? 0 : *lo;
    const int max_c = t.cluster_counts.empty() ? 0 : *hi;
    const int diam = t.max_diameters.empty() ? 0 : *std::max_element(t.max_diameters.begin(), t.max_diameters.end());
    out << t.trial << ',' << t.instance_seed << ',' << t.n << ',' << t.m << ',' << t.demands << ','
        << t.max_path_length << ',' << flag(t.spanning) << ',' << t.attempts.size() << ','
        << (t.attempts.empty() ? 0 : t.attempts.back().solver_seed) << ',' << t.t << ','
        << format_real(t.lambda) << ',' << format_real(t.cp_star) << ',' << format_real(t.g_tilde) << ','
        << format_real(t.ratio) << ',' << flag(t.within_bound) << ',' << flag(t.concentration_ok) << ','
        << format_real(t.node_pass_fraction) << ',' << flag(t.feasible) << ','
        << format_real(t.min_achieved_flow) << ',' << flag(t.certificate_available) << ','
        << format_real(t.certificate_violation) << ',' << t.distinct_programs << ',' << min_c << ','
        << max_c << ',' << diam << ',' << t.rounds << ',' << format_real(t.round_bound) << ','
        << flag(t.rounded) << ',' << t.rounding_rounds << ',' << t.output_edges << ',' << t.roots << ','
        << flag(t.stretch_valid) << ',' << t.violated_demands << ',' << t.max_output_degree << ','
        << flag(t.guarantee_void) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const RunReport& report) {
  out << "metric,value\n";
  out << "trials," << report.trials.size() << '\n';
  out << "mean_ratio," << format_real(report.mean_ratio()) << '\n';
  out << "max_ratio," << format_real(report.max_ratio()) << '\n';
  out << "concentration_fraction," << format_real(report.concentration_fraction()) << '\n';
  out << "stretch_fraction," << format_real(report.stretch_fraction()) << '\n';
  out << "checks_pass," << flag(report.checks_pass()) << '\n';
}

namespace {

// Reals go through format_real so the manifest and the CSVs agree digit for digit.
nlohmann::ordered_json real(double v) { return format_real(v); }

nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["problem"] = to_string(c.problem);
  j["generator"] = to_string(c.generator);
  j["n"] = c.n;
  j["p"] = real(c.p);
  j["rows"] = c.rows;
  j["cols"] = c.cols;
  j["directed"] = c.directed;
  j["graph_file"] = c.graph_file;
  j["k"] = c.k;
  auto demands = nlohmann::ordered_json::array();
  for (const auto& d : c.demands) demands.push_back({d.source, d.target, d.length_bound});
  j["demands"] = demands;
  j["demand_max_distance"] = c.dsn.max_distance;
  j["demand_slack"] = c.dsn.slack;
  j["objective"] = c.resolved_objective().to_string();
  j["epsilon"] = real(c.epsilon);
  j["trials"] = c.trials;
  j["seed"] = c.seed ? std::to_string(*c.seed) : "";
  j["max_retries"] = c.max_retries;
  return j;
}

nlohmann::ordered_json trial_json(const TrialReport& t) {
  nlohmann::ordered_json j;
  j["trial"] = t.trial;
  j["instance_seed"] = std::to_string(t.instance_seed);
  j["n"] = t.n;
  j["m"] = t.m;
  j["demands"] = t.demands;
  j["D"] = t.max_path_length;
  j["spanning"] = t.spanning;
  auto attempts = nlohmann::ordered_json::array();
  for (const auto& a : t.attempts) {
    attempts.push_back({{"solver_seed", std::to_string(a.solver_seed)},
                        {"concentration_ok", a.concentration_ok},
                        {"node_pass_fraction", real(a.node_pass_fraction)}});
  }
  j["attempts"] = attempts;
  j["t"] = t.t;
  j["lambda"] = real(t.lambda);
  j["cluster_counts"] = t.cluster_counts;
  j["max_diameters"] = t.max_diameters;
  j["concentration"] = {{"all_sources_pass", t.concentration_ok},
                        {"node_pass_fraction", real(t.node_pass_fraction)}};
  j["cp_star"] = real(t.cp_star);
  j["g_tilde"] = real(t.g_tilde);
  j["ratio"] = real(t.ratio);
  j["within_bound"] = t.within_bound;
  j["feasible"] = t.feasible;
  j["certificate_available"] = t.certificate_available;
  j["certificate_violation"] = real(t.certificate_violation);
  j["distinct_programs"] = t.distinct_programs;
  j["rounds"] = t.rounds;
  j["round_bound"] = real(t.round_bound);
  j["rounded"] = t.rounded;
  j["rounding_rounds"] = t.rounding_rounds;
  j["output_edges"] = t.output_edges;
  j["roots"] = t.roots;
  j["stretch_valid"] = t.stretch_valid;
  j["violated_demands"] = t.violated_demands;
  j["max_output_degree"] = t.max_output_degree;
  j["guarantee_void"] = t.guarantee_void;
  return j;
}

}  // namespace

void write_manifest(std::ostream& out, const RunReport& report) {
  nlohmann::ordered_json j;
  j["format"] = "padnet-run 1";
  j["config"] = config_json(report.config);
  auto trials = nlohmann::ordered_json::array();
  for (const auto& t : report.trials) trials.push_back(trial_json(t));
  j["trials"] = trials;
  j["summary"] = {{"trials", report.trials.size()},
                  {"mean_ratio", real(report.mean_ratio())},
                  {"max_ratio", real(report.max_ratio())},
                  {"concentration_fraction", real(report.concentration_fraction())},
                  {"stretch_fraction", real(report.stretch_fraction())},
                  {"checks_pass", report.checks_pass()}};
  out << j.dump(2) << '\n';
}

void write_reports(const std::string& dir, const RunReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw InputError("cannot write " + (fs::path(dir) / name).string());
    return f;
  };
  {
    auto f = open("manifest.json");
    write_manifest(f, report);
  }
  {
    auto f = open("trials.csv");
    write_trials_csv(f, report);
  }
  {
    auto f = open("summary.csv");
    write_summary_csv(f, report);
  }
  auto f = open("transcripts.csv");
  f << "trial,";
  write_transcript_csv_header(f);
  for (const auto& t : report.trials) {
    f << t.trial << ',';
    write_transcript_csv_row(f, {t.instance_seed, t.n, t.m, report.config.epsilon, t.max_path_length, t.transcript});
  }
}

}  // namespace padnet
