#include "padnet/lp.hpp"

#include <cmath>
#include <ostream>

#include "padnet/error.hpp"
#include "padnet/text.hpp"
#include "simplex.hpp"

namespace padnet {

int LpProblem::add_variable(std::string name, double cost) {
  var_names.push_back(std::move(name));
  objective.push_back(cost);
  return var_count() - 1;
}

void LpProblem::add_row(std::vector<LpTerm> terms, RowSense sense, double rhs, std::string name) {
  rows.push_back({std::move(terms), sense, rhs, std::move(name)});
}

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
    case LpStatus::IterationLimit:
      return "iteration-limit";
  }
  return "unknown";
}

double primal_residual(const LpProblem& problem, const std::vector<double>& values) {
  double worst = 0.0;
  for (double v : values) {
    worst = std::max(worst, -v);
  }
  for (const auto& row : problem.rows) {
    double lhs = 0.0;
    for (const auto& t : row.terms) {
      lhs += t.coef * values[static_cast<std::size_t>(t.var)];
    }
    const double diff = lhs - row.rhs;
    switch (row.sense) {
      case RowSense::LessEqual:
        worst = std::max(worst, diff);
        break;
      case RowSense::GreaterEqual:
        worst = std::max(worst, -diff);
        break;
      case RowSense::Equal:
        worst = std::max(worst, std::fabs(diff));
        break;
    }
  }
  return worst;
}

namespace {

void validate(const LpProblem& p) {
  if (p.objective.size() != p.var_names.size()) {
    throw InputError("objective length differs from variable count");
  }
  for (double c : p.objective) {
    if (!std::isfinite(c)) throw InputError("non-finite objective coefficient");
  }
  for (const auto& row : p.rows) {
    if (!std::isfinite(row.rhs)) throw InputError("non-finite rhs in row " + row.name);
    for (const auto& t : row.terms) {
      if (t.var < 0 || t.var >= p.var_count()) {
        throw InputError("row " + row.name + " references unknown variable " + std::to_string(t.var));
      }
      if (!std::isfinite(t.coef)) throw InputError("non-finite coefficient in row " + row.name);
    }
  }
}

template <class T>
LpResult run_kernel(const LpProblem& p, const LpOptions& opt) {
  detail::Tableau<T> tableau(p, opt);
  auto result = tableau.solve();
  result.objective = 0.0;
  for (std::size_t j = 0; j < result.values.size(); ++j) {
    result.objective += p.objective[j] * result.values[j];
  }
  result.primal_residual = primal_residual(p, result.values);
  return result;
}

}  // namespace

LpResult solve_lp(const LpProblem& problem, const LpOptions& options) {
  validate(problem);
  if (options.force_exact) {
    return run_kernel<mpq_class>(problem, options);
  }
  auto result = run_kernel<double>(problem, options);
  double scale = 1.0;
  for (const auto& row : problem.rows) {
    scale = std::max(scale, std::fabs(row.rhs));
  }
  const bool stalled = result.status == LpStatus::IterationLimit;
  const bool inaccurate = result.status == LpStatus::Optimal &&
                          result.primal_residual > options.residual_limit * (1.0 + scale);
  if ((stalled || inaccurate) && problem.var_count() <= options.exact_fallback_max_vars) {
    return run_kernel<mpq_class>(problem, options);
  }
  return result;
}

namespace {

void write_terms(std::ostream& out, const LpProblem& p, const std::vector<LpTerm>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    const double mag = std::fabs(t.coef);
    out << (t.coef < 0 ? (first ? "- " : " - ") : (first ? "" : " + "));
    if (mag != 1.0) out << format_real(mag) << ' ';
    out << p.var_names[static_cast<std::size_t>(t.var)];
    first = false;
  }
  if (first) out << "0 " << (p.var_names.empty() ? std::string("x") : p.var_names.front());
}

}  // namespace

void write_lp_format(std::ostream& out, const LpProblem& p) {
  validate(p);
  out << "\\ padnet\nMinimize\n obj: ";
  std::vector<LpTerm> obj;
  for (int j = 0; j < p.var_count(); ++j) {
    if (p.objective[static_cast<std::size_t>(j)] != 0.0) {
      obj.push_back({j, p.objective[static_cast<std::size_t>(j)]});
    }
  }
  write_terms(out, p, obj);
  out << "\nSubject To\n";
  for (int i = 0; i < p.row_count(); ++i) {
    const auto& row = p.rows[static_cast<std::size_t>(i)];
    out << ' ' << (row.name.empty() ? "r" + std::to_string(i) : row.name) << ": ";
    write_terms(out, p, row.terms);
    switch (row.sense) {
      case RowSense::LessEqual:
        out << " <= ";
        break;
      case RowSense::GreaterEqual:
        out << " >= ";
        break;
      case RowSense::Equal:
        out << " = ";
        break;
    }
    out << format_real(row.rhs) << '\n';
  }
  // Every variable has the default bound [0, +inf).
  out << "End\n";
}

}  // namespace padnet
