#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "padnet/graph.hpp"

namespace padnet {

inline constexpr std::size_t kDefaultPathCap = 100000;

struct Demand {
  NodeId source;
  NodeId target;
  int length_bound;

  friend bool operator==(const Demand&, const Demand&) = default;
};

// A simple directed path, as nodes and as the edges joining them.
struct AllowedPath {
  std::vector<NodeId> nodes;
  std::vector<EdgeId> edges;

  int length() const noexcept { return static_cast<int>(edges.size()); }
  friend bool operator==(const AllowedPath&, const AllowedPath&) = default;
};

enum class ProblemKind { DirectedSpanner, LowDegreeSpanner, Dsn, RawCp };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem_kind(const std::string& text);

enum class ObjectiveKind { LinearSum, MaxDegree, PNorm };

// Which edges count toward deg(v). Ignored on undirected graphs, where every
// incident edge counts.
enum class DegreeMode { Out, In, InOut };

/**
   A convex, nondecreasing objective with g(0) = 0 that decomposes over any
   node partition through combiner_value.
 */
struct Objective {
  ObjectiveKind kind = ObjectiveKind::LinearSum;
  DegreeMode degree = DegreeMode::InOut;
  double p = 1.0;  // PNorm only; +infinity for the max norm

  static Objective linear_sum() { return {}; }
  static Objective max_degree(DegreeMode mode = DegreeMode::InOut) {
    return {ObjectiveKind::MaxDegree, mode, 1.0};
  }
  static Objective p_norm(double p);

  std::string to_string() const;
  // Accepts the to_string forms: linear, max-degree[:out|in|inout], p-norm:<p|inf>.
  static Objective parse(const std::string& text);

  friend bool operator==(const Objective&, const Objective&) = default;
};

/**
   Demand pairs with their length bounds, and the derived path-length
   parameter: max_path_length is the longest allowed path over all families
   (the D of the distributed solver), max_length_bound is max L(u, v).
 */
struct DemandSet {
  std::vector<Demand> pairs;
  int max_path_length = 0;
  int max_length_bound = 0;
  bool spanning = false;  // every node is an endpoint of some demand
};

// families[d] lists the allowed paths of demand d in lexicographic node order.
struct PathFamily {
  std::vector<std::vector<AllowedPath>> families;

  std::size_t total_paths() const;
};

struct CpInstance {
  ProblemKind kind = ProblemKind::RawCp;
  Objective objective;
  int stretch = 0;  // spanner problems only
  DemandSet demands;
  PathFamily paths;
};

/**
   All simple directed u->v paths with at most max_len edges, lexicographic by
   node sequence. Throws InstanceTooLargeError beyond cap paths.
 */
std::vector<AllowedPath> enumerate_paths(const Graph& g, NodeId u, NodeId v, int max_len,
                                         std::size_t cap = kDefaultPathCap);

double evaluate_objective(const Objective& obj, const EdgeVector& x, const Graph& g);
// Raw-value form; throws InputError on negative or NaN entries.
double evaluate_objective(const Objective& obj, std::span<const double> x, const Graph& g);

// h_sigma applied to the per-cluster objective values.
double combiner_value(const Objective& obj, std::span<const double> cluster_values);

// Fractional degree of every node under obj.degree.
std::vector<double> fractional_degrees(const Graph& g, std::span<const double> x, DegreeMode mode);

// Demands = edges, L = k, paths of length <= k.
CpInstance build_spanner_instance(const Graph& g, int k, Objective objective = Objective::linear_sum(),
                                  std::size_t cap = kDefaultPathCap);

// Throws InfeasibleDemandError when L(u, v) is below the directed distance.
CpInstance build_dsn_instance(const Graph& g, std::vector<Demand> demands,
                              Objective objective = Objective::linear_sum(),
                              std::size_t cap = kDefaultPathCap);

/**
   Text form of an instance. Spanner instances store only k; demand lists are
   stored for DSN and raw programs. The serialization is canonical: parsing
   and re-writing reproduces the same bytes.
 */
struct InstanceSpec {
  std::string graph_path;
  ProblemKind kind = ProblemKind::DirectedSpanner;
  Objective objective;
  int stretch = 2;
  std::vector<Demand> demands;

  friend bool operator==(const InstanceSpec&, const InstanceSpec&) = default;
};

void write_instance_spec(std::ostream& out, const InstanceSpec& spec);
InstanceSpec read_instance_spec(std::istream& in);
CpInstance materialize(const Graph& g, const InstanceSpec& spec, std::size_t cap = kDefaultPathCap);

}  // namespace padnet
