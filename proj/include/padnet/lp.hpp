#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace padnet {

enum class RowSense { LessEqual, GreaterEqual, Equal };

struct LpTerm {
  int var;
  double coef;
};

struct LpRow {
  std::vector<LpTerm> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
  std::string name;
};

/**
   minimize objective . y  subject to rows, y >= 0.
 */
struct LpProblem {
  std::vector<std::string> var_names;
  std::vector<double> objective;
  std::vector<LpRow> rows;

  int add_variable(std::string name, double cost = 0.0);
  void add_row(std::vector<LpTerm> terms, RowSense sense, double rhs, std::string name);

  int var_count() const noexcept { return static_cast<int>(var_names.size()); }
  int row_count() const noexcept { return static_cast<int>(rows.size()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(LpStatus status);

struct LpOptions {
  // Pivot and reduced-cost threshold of the floating-point kernel.
  double tolerance = 1e-9;
  // Solutions whose primal residual exceeds this (relative to 1 + max |rhs|)
  // are re-solved in rational arithmetic when small enough.
  double residual_limit = 1e-9;
  int exact_fallback_max_vars = 200;
  bool force_exact = false;
  // 0 picks 50 * (rows + columns) + 1000.
  long iteration_limit = 0;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int degenerate_run = 25;
  // When every cost is nonnegative and no row is an equation, the dual
  // simplex starts from the slack basis without an artificial phase.
  bool allow_dual = true;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  double primal_residual = 0.0;  // worst row violation or negative value
  double dual_residual = 0.0;    // most negative final reduced cost, as a positive number
  long pivots = 0;
  bool exact = false;
};

/**
   Two-phase dense tableau simplex. Entering column by most negative reduced
   cost (lowest index on ties), switching to Bland's rule during runs of
   degenerate pivots, so results are deterministic and the method terminates.
 */
LpResult solve_lp(const LpProblem& problem, const LpOptions& options = {});

// Largest violation of problem's rows and bounds at values.
double primal_residual(const LpProblem& problem, const std::vector<double>& values);

// CPLEX LP text format.
void write_lp_format(std::ostream& out, const LpProblem& problem);

}  // namespace padnet
