#include "padnet/cp_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "padnet/error.hpp"
#include "padnet/text.hpp"

namespace padnet {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::DirectedSpanner:
      return "spanner";
    case ProblemKind::LowDegreeSpanner:
      return "low-degree-spanner";
    case ProblemKind::Dsn:
      return "dsn";
    case ProblemKind::RawCp:
      return "raw-cp";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(const std::string& text) {
  if (text == "spanner") return ProblemKind::DirectedSpanner;
  if (text == "low-degree-spanner") return ProblemKind::LowDegreeSpanner;
  if (text == "dsn") return ProblemKind::Dsn;
  if (text == "raw-cp") return ProblemKind::RawCp;
  throw ConfigError("unknown problem kind '" + text + "'");
}

Objective Objective::p_norm(double p) {
  if (!(p >= 1.0)) {
    throw ConfigError("p-norm needs p >= 1");
  }
  return {ObjectiveKind::PNorm, DegreeMode::InOut, p};
}

std::string Objective::to_string() const {
  switch (kind) {
    case ObjectiveKind::LinearSum:
      return "linear";
    case ObjectiveKind::MaxDegree:
      switch (degree) {
        case DegreeMode::Out:
          return "max-degree:out";
        case DegreeMode::In:
          return "max-degree:in";
        case DegreeMode::InOut:
          return "max-degree:inout";
      }
      break;
    case ObjectiveKind::PNorm:
      return "p-norm:" + (std::isinf(p) ? std::string("inf") : format_real(p));
  }
  return "unknown";
}

Objective Objective::parse(const std::string& text) {
  if (text == "linear" || text == "linear-sum") return linear_sum();
  if (text == "max-degree" || text == "max-degree:inout") return max_degree(DegreeMode::InOut);
  if (text == "max-degree:out") return max_degree(DegreeMode::Out);
  if (text == "max-degree:in") return max_degree(DegreeMode::In);
  const std::string prefix = "p-norm:";
  if (text.rfind(prefix, 0) == 0) {
    const auto arg = text.substr(prefix.size());
    if (arg == "inf") {
      return p_norm(std::numeric_limits<double>::infinity());
    }
    try {
      std::size_t used = 0;
      const double p = std::stod(arg, &used);
      if (used == arg.size()) {
        return p_norm(p);
      }
    } catch (const std::logic_error&) {
    }
    throw ConfigError("bad p-norm exponent '" + arg + "'");
  }
  throw ConfigError("unknown objective '" + text + "'");
}

std::size_t PathFamily::total_paths() const {
  std::size_t total = 0;
  for (const auto& fam : families) {
    total += fam.size();
  }
  return total;
}

namespace {

struct PathSearch {
  const Graph& g;
  NodeId target;
  int max_len;
  std::size_t cap;
  std::vector<char> on_path;
  AllowedPath current;
  std::vector<AllowedPath> found;

  void extend(NodeId u) {
    if (u == target) {
      if (found.size() == cap) {
        throw InstanceTooLargeError("more than " + std::to_string(cap) + " allowed paths to node " +
                                    std::to_string(target));
      }
      found.push_back(current);
      return;
    }
    if (current.length() == max_len) {
      return;
    }
    for (const auto& arc : g.out_arcs(u)) {
      const auto h = static_cast<std::size_t>(arc.head);
      if (on_path[h]) {
        continue;
      }
      on_path[h] = 1;
      current.nodes.push_back(arc.head);
      current.edges.push_back(arc.edge);
      extend(arc.head);
      current.nodes.pop_back();
      current.edges.pop_back();
      on_path[h] = 0;
    }
  }
};

}  // namespace

std::vector<AllowedPath> enumerate_paths(const Graph& g, NodeId u, NodeId v, int max_len,
                                         std::size_t cap) {
  g.check_node(u);
  g.check_node(v);
  if (max_len < 1) {
    throw InputError("max_len must be at least 1");
  }
  if (u == v) {
    throw InputError("path endpoints must differ");
  }
  PathSearch search{g, v, max_len, cap, std::vector<char>(static_cast<std::size_t>(g.node_count()), 0),
                    {}, {}};
  search.on_path[static_cast<std::size_t>(u)] = 1;
  search.current.nodes.push_back(u);
  search.extend(u);
  return std::move(search.found);
}

std::vector<double> fractional_degrees(const Graph& g, std::span<const double> x, DegreeMode mode) {
  if (x.size() != static_cast<std::size_t>(g.edge_count())) {
    throw InputError("edge vector length " + std::to_string(x.size()) + " != m = " +
                     std::to_string(g.edge_count()));
  }
  std::vector<double> deg(static_cast<std::size_t>(g.node_count()), 0.0);
  const bool count_tail = !g.directed() || mode != DegreeMode::In;
  const bool count_head = !g.directed() || mode != DegreeMode::Out;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edge(e);
    const double v = x[static_cast<std::size_t>(e)];
    if (count_tail) deg[static_cast<std::size_t>(ed.from)] += v;
    if (count_head) deg[static_cast<std::size_t>(ed.to)] += v;
  }
  return deg;
}

namespace {

double p_norm_of(std::span<const double> values, double p) {
  if (std::isinf(p)) {
    double best = 0.0;
    for (double v : values) best = std::max(best, v);
    return best;
  }
  if (p == 1.0) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
  }
  // Scale by the largest entry to keep v^p in range.
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, v);
  if (scale == 0.0) {
    return 0.0;
  }
  double sum = 0.0;
  for (double v : values) sum += std::pow(v / scale, p);
  return scale * std::pow(sum, 1.0 / p);
}

}  // namespace

double evaluate_objective(const Objective& obj, std::span<const double> x, const Graph& g) {
  if (x.size() != static_cast<std::size_t>(g.edge_count())) {
    throw InputError("edge vector length " + std::to_string(x.size()) + " != m = " +
                     std::to_string(g.edge_count()));
  }
  for (std::size_t e = 0; e < x.size(); ++e) {
    if (!(x[e] >= 0.0)) {
      throw InputError("negative or NaN entry at edge " + std::to_string(e));
    }
  }
  switch (obj.kind) {
    case ObjectiveKind::LinearSum:
      return p_norm_of(x, 1.0);
    case ObjectiveKind::MaxDegree: {
      const auto deg = fractional_degrees(g, x, obj.degree);
      return p_norm_of(deg, std::numeric_limits<double>::infinity());
    }
    case ObjectiveKind::PNorm:
      return p_norm_of(x, obj.p);
  }
  return 0.0;
}

double evaluate_objective(const Objective& obj, const EdgeVector& x, const Graph& g) {
  return evaluate_objective(obj, x.values(), g);
}

double combiner_value(const Objective& obj, std::span<const double> cluster_values) {
  switch (obj.kind) {
    case ObjectiveKind::LinearSum:
      return p_norm_of(cluster_values, 1.0);
    case ObjectiveKind::MaxDegree:
      return p_norm_of(cluster_values, std::numeric_limits<double>::infinity());
    case ObjectiveKind::PNorm:
      return p_norm_of(cluster_values, obj.p);
  }
  return 0.0;
}

namespace {

void finish_demand_set(const Graph& g, CpInstance& inst) {
  auto& ds = inst.demands;
  ds.max_path_length = 0;
  ds.max_length_bound = 0;
  std::vector<char> endpoint(static_cast<std::size_t>(g.node_count()), 0);
  for (std::size_t d = 0; d < ds.pairs.size(); ++d) {
    const auto& dem = ds.pairs[d];
    const auto& fam = inst.paths.families[d];
    if (fam.empty()) {
      throw InfeasibleDemandError("demand (" + std::to_string(dem.source) + ", " +
                                  std::to_string(dem.target) + ") has no allowed path");
    }
    for (const auto& p : fam) {
      ds.max_path_length = std::max(ds.max_path_length, p.length());
    }
    ds.max_length_bound = std::max(ds.max_length_bound, dem.length_bound);
    endpoint[static_cast<std::size_t>(dem.source)] = 1;
    endpoint[static_cast<std::size_t>(dem.target)] = 1;
  }
  ds.spanning = std::all_of(endpoint.begin(), endpoint.end(), [](char c) { return c != 0; });
}

}  // namespace

CpInstance build_spanner_instance(const Graph& g, int k, Objective objective, std::size_t cap) {
  if (k < 1) {
    throw ConfigError("stretch k must be at least 1");
  }
  CpInstance inst;
  inst.kind = ProblemKind::DirectedSpanner;
  inst.objective = objective;
  inst.stretch = k;
  inst.demands.pairs.reserve(static_cast<std::size_t>(g.edge_count()));
  inst.paths.families.reserve(static_cast<std::size_t>(g.edge_count()));
  for (const auto& e : g.edges()) {
    inst.demands.pairs.push_back({e.from, e.to, k});
    inst.paths.families.push_back(enumerate_paths(g, e.from, e.to, k, cap));
  }
  finish_demand_set(g, inst);
  return inst;
}

CpInstance build_dsn_instance(const Graph& g, std::vector<Demand> demands, Objective objective,
                              std::size_t cap) {
  CpInstance inst;
  inst.kind = ProblemKind::Dsn;
  inst.objective = objective;
  inst.paths.families.reserve(demands.size());
  for (const auto& dem : demands) {
    g.check_node(dem.source);
    g.check_node(dem.target);
    if (dem.source == dem.target) {
      throw InputError("demand endpoints must differ (node " + std::to_string(dem.source) + ")");
    }
    if (dem.length_bound < 1) {
      throw InputError("length bound must be positive");
    }
    const int d = directed_distances(g, dem.source)[static_cast<std::size_t>(dem.target)];
    if (dem.length_bound < d) {
      throw InfeasibleDemandError(
          "demand (" + std::to_string(dem.source) + ", " + std::to_string(dem.target) + ") has L = " +
          std::to_string(dem.length_bound) + " below the distance " +
          (d == kUnreachable ? std::string("inf") : std::to_string(d)));
    }
    inst.paths.families.push_back(enumerate_paths(g, dem.source, dem.target, dem.length_bound, cap));
  }
  inst.demands.pairs = std::move(demands);
  finish_demand_set(g, inst);
  return inst;
}

void write_instance_spec(std::ostream& out, const InstanceSpec& spec) {
  if (spec.graph_path.empty() || spec.graph_path.find_first_of(" \t\n") != std::string::npos) {
    throw InputError("graph path must be nonempty and contain no whitespace");
  }
  out << "padnet-instance 1\n";
  out << "graph " << spec.graph_path << '\n';
  out << "problem " << to_string(spec.kind) << '\n';
  out << "objective " << spec.objective.to_string() << '\n';
  if (spec.kind == ProblemKind::DirectedSpanner || spec.kind == ProblemKind::LowDegreeSpanner) {
    out << "stretch " << spec.stretch << '\n';
    return;
  }
  out << "demands " << spec.demands.size() << '\n';
  for (const auto& d : spec.demands) {
    out << d.source << ' ' << d.target << ' ' << d.length_bound << '\n';
  }
}

namespace {

std::string expect_field(std::istream& in, const std::string& key) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') {
      break;
    }
  }
  std::istringstream ls(line);
  std::string got;
  std::string value;
  if (!(ls >> got >> value) || got != key) {
    throw InputError("instance file: expected '" + key + " <value>', got '" + line + "'");
  }
  return value;
}

}  // namespace

InstanceSpec read_instance_spec(std::istream& in) {
  if (expect_field(in, "padnet-instance") != "1") {
    throw InputError("instance file: unsupported version");
  }
  InstanceSpec spec;
  spec.graph_path = expect_field(in, "graph");
  try {
    spec.kind = parse_problem_kind(expect_field(in, "problem"));
    spec.objective = Objective::parse(expect_field(in, "objective"));
  } catch (const ConfigError& e) {
    throw InputError(std::string("instance file: ") + e.what());
  }
  if (spec.kind == ProblemKind::DirectedSpanner || spec.kind == ProblemKind::LowDegreeSpanner) {
    spec.stretch = std::stoi(expect_field(in, "stretch"));
    return spec;
  }
  const long count = std::stol(expect_field(in, "demands"));
  if (count < 0) {
    throw InputError("instance file: negative demand count");
  }
  for (long i = 0; i < count; ++i) {
    Demand d{};
    if (!(in >> d.source >> d.target >> d.length_bound)) {
      throw InputError("instance file: truncated demand list");
    }
    spec.demands.push_back(d);
  }
  return spec;
}

CpInstance materialize(const Graph& g, const InstanceSpec& spec, std::size_t cap) {
  if (spec.kind == ProblemKind::DirectedSpanner || spec.kind == ProblemKind::LowDegreeSpanner) {
    auto inst = build_spanner_instance(g, spec.stretch, spec.objective, cap);
    inst.kind = spec.kind;
    return inst;
  }
  auto inst = build_dsn_instance(g, spec.demands, spec.objective, cap);
  inst.kind = spec.kind;
  return inst;
}

}  // namespace padnet
