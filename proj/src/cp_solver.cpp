#include "padnet/cp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "padnet/error.hpp"

namespace padnet {

namespace {

bool is_cut_norm(const Objective& obj) {
  return obj.kind == ObjectiveKind::PNorm && obj.p > 1.0 && !std::isinf(obj.p);
}

}  // namespace

CpProgram build_cp_program(const Graph& g, const Objective& objective, std::span<const EdgeId> scope,
                           std::span<const ScopedDemand> demands, std::size_t total_demands) {
  CpProgram prog;
  prog.total_demands = total_demands;
  prog.objective = objective;
  prog.edge_count = static_cast<std::size_t>(g.edge_count());
  // Only edges on some allowed path get a variable: any other edge is zero in
  // an optimum because g is nondecreasing.
  std::vector<char> in_scope(prog.edge_count, 0);
  for (EdgeId e : scope) {
    if (e < 0 || e >= g.edge_count()) {
      throw InputError("scope edge " + std::to_string(e) + " out of range");
    }
    in_scope[static_cast<std::size_t>(e)] = 1;
  }
  std::vector<char> used(prog.edge_count, 0);
  for (const auto& dem : demands) {
    for (const auto& path : dem.paths) {
      for (EdgeId e : path.edges) {
        if (!in_scope[static_cast<std::size_t>(e)]) {
          throw InternalError("demand " + std::to_string(dem.index) + " uses edge " +
                              std::to_string(e) + " outside the program scope");
        }
        used[static_cast<std::size_t>(e)] = 1;
      }
    }
  }
  for (std::size_t e = 0; e < prog.edge_count; ++e) {
    if (used[e]) prog.scope.push_back(static_cast<EdgeId>(e));
  }

  auto& lp = prog.lp;
  std::vector<int> var_of_edge(prog.edge_count, -1);
  const bool linear = objective.kind == ObjectiveKind::LinearSum ||
                      (objective.kind == ObjectiveKind::PNorm && objective.p == 1.0);
  for (EdgeId e : prog.scope) {
    var_of_edge[static_cast<std::size_t>(e)] =
        lp.add_variable("x_" + std::to_string(e), linear ? 1.0 : 0.0);
  }

  for (const auto& dem : demands) {
    if (dem.index < 0 || static_cast<std::size_t>(dem.index) >= total_demands) {
      throw InputError("demand index " + std::to_string(dem.index) + " out of range");
    }
    prog.demands.push_back(dem.index);
    prog.flow_offset.push_back(lp.var_count());
    const std::string tag = std::to_string(dem.index);
    for (std::size_t p = 0; p < dem.paths.size(); ++p) {
      lp.add_variable("f_" + tag + "_" + std::to_string(p));
    }
  }

  if (objective.kind == ObjectiveKind::MaxDegree) {
    prog.aux = lp.add_variable("lambda", 1.0);
  } else if (!linear) {
    prog.aux = lp.add_variable("s", 1.0);
  }

  for (std::size_t d = 0; d < demands.size(); ++d) {
    const auto& dem = demands[d];
    const int first = prog.flow_offset[d];
    const std::string tag = std::to_string(dem.index);
    // Paths through each edge, in ascending edge order.
    std::map<EdgeId, std::vector<int>> through;
    std::vector<LpTerm> flow_terms;
    for (std::size_t p = 0; p < dem.paths.size(); ++p) {
      const int var = first + static_cast<int>(p);
      flow_terms.push_back({var, 1.0});
      for (EdgeId e : dem.paths[p].edges) {
        through[e].push_back(var);
      }
    }
    for (const auto& [e, vars] : through) {
      const int xv = var_of_edge[static_cast<std::size_t>(e)];
      prog.capacity_rows.push_back(lp.row_count());
      std::vector<LpTerm> terms;
      for (int v : vars) terms.push_back({v, 1.0});
      terms.push_back({xv, -1.0});
      lp.add_row(std::move(terms), RowSense::LessEqual, 0.0,
                 "cap_" + tag + "_" + std::to_string(e));
    }
    lp.add_row(std::move(flow_terms), RowSense::GreaterEqual, 1.0, "flow_" + tag);
  }

  if (objective.kind == ObjectiveKind::MaxDegree) {
    std::map<NodeId, std::vector<LpTerm>> rows;
    const bool tail = !g.directed() || objective.degree != DegreeMode::In;
    const bool head = !g.directed() || objective.degree != DegreeMode::Out;
    for (EdgeId e : prog.scope) {
      const int xv = var_of_edge[static_cast<std::size_t>(e)];
      if (tail) rows[g.edge(e).from].push_back({xv, 1.0});
      if (head) rows[g.edge(e).to].push_back({xv, 1.0});
    }
    for (auto& [v, terms] : rows) {
      terms.push_back({prog.aux, -1.0});
      lp.add_row(std::move(terms), RowSense::LessEqual, 0.0, "deg_" + std::to_string(v));
    }
  } else if (prog.aux >= 0) {
    // s >= max_e x_e: exact for the max norm and a valid first relaxation
    // for any other p.
    for (EdgeId e : prog.scope) {
      lp.add_row({{var_of_edge[static_cast<std::size_t>(e)], 1.0}, {prog.aux, -1.0}},
                 RowSense::LessEqual, 0.0, "norm_" + std::to_string(e));
    }
  }
  return prog;
}

std::vector<int> padded_demands(const CpInstance& inst, std::span<const NodeId> cluster,
                                const Graph& g) {
  const auto inside = node_mask(g.node_count(), cluster);
  const int radius = inst.demands.max_path_length;
  std::map<NodeId, bool> padded;
  std::vector<int> out;
  for (std::size_t d = 0; d < inst.demands.pairs.size(); ++d) {
    const NodeId u = inst.demands.pairs[d].source;
    if (!inside[static_cast<std::size_t>(u)]) continue;
    auto it = padded.find(u);
    if (it == padded.end()) {
      const auto b = ball(g, u, radius);
      const bool ok = std::all_of(b.begin(), b.end(),
                                  [&](NodeId w) { return inside[static_cast<std::size_t>(w)] != 0; });
      it = padded.emplace(u, ok).first;
    }
    if (it->second) out.push_back(static_cast<int>(d));
  }
  return out;
}

namespace {

std::vector<ScopedDemand> scoped(const CpInstance& inst, std::span<const int> indices) {
  std::vector<ScopedDemand> out;
  out.reserve(indices.size());
  for (int d : indices) {
    out.push_back({d, inst.paths.families[static_cast<std::size_t>(d)]});
  }
  return out;
}

}  // namespace

CpProgram build_cluster_cp(const CpInstance& inst, std::span<const NodeId> cluster, const Graph& g) {
  const auto inside = node_mask(g.node_count(), cluster);
  std::vector<EdgeId> scope;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edge(e);
    if (inside[static_cast<std::size_t>(ed.from)] && inside[static_cast<std::size_t>(ed.to)]) {
      scope.push_back(e);
    }
  }
  const auto demands = padded_demands(inst, cluster, g);
  return build_cp_program(g, inst.objective, scope, scoped(inst, demands),
                          inst.demands.pairs.size());
}

std::vector<int> all_demands(const CpInstance& inst) {
  std::vector<int> all(inst.demands.pairs.size());
  for (std::size_t d = 0; d < all.size(); ++d) all[d] = static_cast<int>(d);
  return all;
}

CpProgram build_global_cp(const CpInstance& inst, const Graph& g) {
  std::vector<EdgeId> scope(static_cast<std::size_t>(g.edge_count()));
  for (EdgeId e = 0; e < g.edge_count(); ++e) scope[static_cast<std::size_t>(e)] = e;
  const auto all = all_demands(inst);
  return build_cp_program(g, inst.objective, scope, scoped(inst, all), all.size());
}

namespace {

void require_solved(const LpResult& r) {
  if (r.status != LpStatus::Optimal) {
    throw InternalError("network-design LP ended with status " + to_string(r.status));
  }
}

CpSolution extract(const CpProgram& prog, const LpResult& r, const Graph& g) {
  CpSolution sol;
  const std::size_t nd = prog.demands.size();
  std::vector<double> vals = r.values;
  // Scale every demand's flow to exactly one unit.
  for (std::size_t d = 0; d < nd; ++d) {
    const int first = prog.flow_offset[d];
    const int last = d + 1 < nd ? prog.flow_offset[d + 1]
                                : (prog.aux >= 0 ? prog.aux : prog.lp.var_count());
    double total = 0.0;
    for (int v = first; v < last; ++v) total += vals[static_cast<std::size_t>(v)];
    if (total > 1.0) {
      for (int v = first; v < last; ++v) vals[static_cast<std::size_t>(v)] /= total;
    }
  }
  // Lower x_e to the largest load any capacity row puts on it.
  std::vector<double> x(prog.edge_count, 0.0);
  std::vector<double> xvar(prog.scope.size(), 0.0);
  for (int row : prog.capacity_rows) {
    const auto& terms = prog.lp.rows[static_cast<std::size_t>(row)].terms;
    double load = 0.0;
    for (std::size_t t = 0; t + 1 < terms.size(); ++t) {
      load += vals[static_cast<std::size_t>(terms[t].var)];
    }
    auto& slot = xvar[static_cast<std::size_t>(terms.back().var)];
    slot = std::max(slot, load);
  }
  for (std::size_t j = 0; j < prog.scope.size(); ++j) {
    x[static_cast<std::size_t>(prog.scope[j])] = xvar[j];
  }
  sol.flow.resize(prog.total_demands);
  for (std::size_t d = 0; d < nd; ++d) {
    const int first = prog.flow_offset[d];
    const int last = d + 1 < nd ? prog.flow_offset[d + 1]
                                : (prog.aux >= 0 ? prog.aux : prog.lp.var_count());
    sol.flow[static_cast<std::size_t>(prog.demands[d])].assign(vals.begin() + first,
                                                                vals.begin() + last);
  }
  sol.objective = evaluate_objective(prog.objective, std::span<const double>(x), g);
  sol.x = EdgeVector(std::move(x));
  sol.status = r.status;
  sol.primal_residual = r.primal_residual;
  sol.dual_residual = r.dual_residual;
  sol.pivots = r.pivots;
  sol.lp_solves = 1;
  sol.exact = r.exact;
  return sol;
}

double norm_of_scope(const CpProgram& prog, const std::vector<double>& values) {
  double scale = 0.0;
  for (std::size_t j = 0; j < prog.scope.size(); ++j) scale = std::max(scale, values[j]);
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < prog.scope.size(); ++j) sum += std::pow(values[j] / scale, prog.objective.p);
  return scale * std::pow(sum, 1.0 / prog.objective.p);
}

// Kelley's cutting planes on s >= ||x||_p: each tangent s >= <w, x> with
// w = (x*/||x*||)^{p-1} has dual norm 1, so it is valid everywhere.
CpSolution solve_cut_loop(const CpProgram& prog, const Graph& g, const CpSolveOptions& options) {
  LpProblem lp = prog.lp;
  const double p = prog.objective.p;
  LpResult best;
  double best_upper = std::numeric_limits<double>::infinity();
  double lower = 0.0;
  long pivots = 0;
  int solves = 0;
  for (int cut = 0;; ++cut) {
    const auto r = solve_lp(lp, options.lp);
    ++solves;
    pivots += r.pivots;
    require_solved(r);
    lower = r.values[static_cast<std::size_t>(prog.aux)];
    const double upper = norm_of_scope(prog, r.values);
    if (upper < best_upper) {
      best_upper = upper;
      best = r;
    }
    if (best_upper - lower <= options.norm_gap * (1.0 + best_upper) || cut >= options.max_cuts) {
      break;
    }
    std::vector<LpTerm> terms{{prog.aux, 1.0}};
    for (std::size_t j = 0; j < prog.scope.size(); ++j) {
      const double w = std::pow(r.values[j] / upper, p - 1.0);
      if (w > 0.0) terms.push_back({static_cast<int>(j), -w});
    }
    lp.add_row(std::move(terms), RowSense::GreaterEqual, 0.0, "cut_" + std::to_string(cut));
  }
  auto sol = extract(prog, best, g);
  sol.gap = std::max(0.0, best_upper - lower);
  sol.pivots = pivots;
  sol.lp_solves = solves;
  return sol;
}

}  // namespace

CpSolution solve_cp(const CpProgram& program, const Graph& g, const CpSolveOptions& options) {
  if (program.edge_count != static_cast<std::size_t>(g.edge_count())) {
    throw InputError("program was built for a different graph");
  }
  if (is_cut_norm(program.objective)) {
    return solve_cut_loop(program, g, options);
  }
  const auto r = solve_lp(program.lp, options.lp);
  require_solved(r);
  return extract(program, r, g);
}

CpSolution solve_global_oracle(const Graph& g, const CpInstance& inst,
                               const CpSolveOptions& options, std::size_t path_cap) {
  if (inst.paths.total_paths() > path_cap) {
    throw InstanceTooLargeError("instance has " + std::to_string(inst.paths.total_paths()) +
                                " allowed paths, above the cap of " + std::to_string(path_cap));
  }
  return solve_cp(build_global_cp(inst, g), g, options);
}

FeasibilityReport check_feasibility(const Graph& g, const CpInstance& inst, const EdgeVector& x,
                                    double tol, Execution exec) {
  if (x.size() != static_cast<std::size_t>(g.edge_count())) {
    throw InputError("edge vector length differs from m");
  }
  FeasibilityReport report;
  const auto& fams = inst.paths.families;
  report.achieved.assign(fams.size(), 0.0);
  for_each_index(fams.size(), exec, [&](std::size_t d) {
    const auto& fam = fams[d];
    if (fam.size() == 1) {
      double flow = std::numeric_limits<double>::infinity();
      for (EdgeId e : fam.front().edges) flow = std::min(flow, x[e]);
      report.achieved[d] = flow;
      return;
    }
    LpProblem lp;
    std::map<EdgeId, std::vector<LpTerm>> through;
    for (std::size_t p = 0; p < fam.size(); ++p) {
      const int v = lp.add_variable("f_" + std::to_string(d) + "_" + std::to_string(p), -1.0);
      for (EdgeId e : fam[p].edges) through[e].push_back({v, 1.0});
    }
    for (auto& [e, terms] : through) {
      lp.add_row(std::move(terms), RowSense::LessEqual, x[e], "cap_" + std::to_string(e));
    }
    const auto r = solve_lp(lp);
    require_solved(r);
    report.achieved[d] = -r.objective;
  });
  for (double a : report.achieved) {
    if (a < 1.0 - tol) report.feasible = false;
  }
  return report;
}

std::shared_ptr<const CpSolution> ProgramCache::find(const std::vector<int>& demands) const {
  const auto it = entries_.find(demands);
  return it == entries_.end() ? nullptr : it->second;
}

void ProgramCache::insert(const std::vector<int>& demands, std::shared_ptr<const CpSolution> solution) {
  entries_.emplace(demands, std::move(solution));
}

double certificate_violation(const CpInstance& inst, const EdgeVector& x,
                             const std::vector<std::vector<double>>& flow) {
  const auto& fams = inst.paths.families;
  if (flow.size() != fams.size()) {
    throw InputError("certificate must list one flow vector per demand");
  }
  double worst = 0.0;
  for (std::size_t d = 0; d < fams.size(); ++d) {
    const auto& f = flow[d];
    if (f.size() != fams[d].size()) {
      throw InputError("flow vector of demand " + std::to_string(d) + " has the wrong length");
    }
    double total = 0.0;
    std::map<EdgeId, double> load;
    for (std::size_t p = 0; p < f.size(); ++p) {
      worst = std::max(worst, -f[p]);
      total += f[p];
      for (EdgeId e : fams[d][p].edges) load[e] += f[p];
    }
    worst = std::max(worst, 1.0 - total);
    for (const auto& [e, l] : load) worst = std::max(worst, l - x[e]);
  }
  return worst;
}

}  // namespace padnet
