#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "padnet/cp_model.hpp"
#include "padnet/generators.hpp"
#include "padnet/graph.hpp"
#include "padnet/local_sim.hpp"
#include "padnet/parallel.hpp"

namespace padnet {

enum class GeneratorKind { Gnp, Grid, Cycle, File };

std::string to_string(GeneratorKind kind);
GeneratorKind parse_generator(const std::string& text);

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::DirectedSpanner;
  GeneratorKind generator = GeneratorKind::Gnp;
  int n = 16;
  double p = 0.3;
  int rows = 4;  // grid only
  int cols = 4;
  bool directed = true;
  std::string graph_file;  // File generator
  int k = 2;
  std::vector<Demand> demands;  // dsn / raw-cp; sampled when empty
  DsnDemandOptions dsn;
  std::optional<Objective> objective;  // default depends on the problem
  double epsilon = 0.5;
  int trials = 1;
  std::optional<std::uint64_t> seed;  // mandatory
  std::string out_dir;                // empty: no files
  int max_retries = 3;
  Execution execution = Execution::Serial;

  // Throws ConfigError on a missing seed or an out-of-range field.
  void validate() const;
  Objective resolved_objective() const;
};

struct GeneratedInstance {
  Graph graph;
  CpInstance instance;
  int attempts = 1;
};

// The trial's graph as generated on the first attempt.
Graph generate_graph(const ExperimentConfig& config, int trial = 0);

// Deterministic in (config, trial); regenerates up to 10 times when demand
// sampling fails, then throws InfeasibleDemandError.
GeneratedInstance generate_instance(const ExperimentConfig& config, int trial = 0);

struct AttemptRecord {
  std::uint64_t solver_seed = 0;
  bool concentration_ok = false;
  double node_pass_fraction = 0.0;
};

struct TrialReport {
  int trial = 0;
  std::uint64_t instance_seed = 0;
  int n = 0;
  int m = 0;
  int demands = 0;
  int max_path_length = 0;
  bool spanning = false;
  std::vector<AttemptRecord> attempts;  // last one is the reported run
  int t = 0;
  double lambda = 0.0;
  double cp_star = 0.0;
  double g_tilde = 0.0;
  double ratio = 0.0;
  bool within_bound = false;   // g~ <= (1 + eps) CP* + 1e-6
  bool concentration_ok = false;
  double node_pass_fraction = 0.0;
  bool feasible = false;
  double min_achieved_flow = 0.0;
  bool certificate_available = false;
  double certificate_violation = 0.0;
  int distinct_programs = 0;
  std::vector<int> cluster_counts;  // per iteration
  std::vector<int> max_diameters;   // per iteration, hop diameter in G
  int rounds = 0;
  double round_bound = 0.0;
  bool rounded = false;  // raw-cp trials stop after the CP
  int rounding_rounds = 0;
  RoundTranscript transcript;  // solver then rounding
  int output_edges = 0;
  int roots = 0;
  bool stretch_valid = false;
  int violated_demands = 0;
  int max_output_degree = 0;  // low-degree problem
  bool guarantee_void = false;  // dsn with a non-spanning demand set
};

struct RunReport {
  ExperimentConfig config;
  std::vector<TrialReport> trials;

  double mean_ratio() const;
  double max_ratio() const;
  double concentration_fraction() const;
  double stretch_fraction() const;
  // Every concentration-passing trial met the bound and was feasible.
  bool checks_pass() const;
};

class ExperimentError : public std::runtime_error {
 public:
  ExperimentError(int trial, const std::string& what)
      : std::runtime_error("trial " + std::to_string(trial) + ": " + what), trial_(trial) {}
  int trial() const noexcept { return trial_; }

 private:
  int trial_;
};

TrialReport run_trial(const ExperimentConfig& config, int trial);

/**
   All trials, then reports under config.out_dir: manifest.json, trials.csv,
   transcripts.csv and summary.csv. A failing trial is rethrown as
   ExperimentError after the reports of the trials before it are written.
 */
RunReport run_experiment(const ExperimentConfig& config);

void write_trials_csv(std::ostream& out, const RunReport& report);
void write_summary_csv(std::ostream& out, const RunReport& report);
void write_manifest(std::ostream& out, const RunReport& report);
void write_reports(const std::string& dir, const RunReport& report);

}  // namespace padnet
