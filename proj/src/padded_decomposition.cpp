#include "padnet/padded_decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>

#include "padnet/error.hpp"
#include "padnet/text.hpp"

namespace padnet {

PaddedDecompositionParams PaddedDecompositionParams::make(int k, double epsilon, int n) {
  if (k < 0) {
    throw ConfigError("padding radius k must be nonnegative");
  }
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw ConfigError("padding epsilon must lie in (0, 1]");
  }
  if (n < 1) {
    throw ConfigError("decomposition needs at least one node");
  }
  PaddedDecompositionParams p;
  p.k = k;
  p.epsilon = epsilon;
  p.n = n;
  p.r = (2.0 / epsilon) * static_cast<double>(k);
  p.radius_cap = p.r * std::log(static_cast<double>(n)) + static_cast<double>(k);
  return p;
}

int PaddedDecompositionParams::hop_cap() const {
  return static_cast<int>(std::floor(radius_cap));
}

std::vector<std::vector<NodeId>> Clustering::members() const {
  std::vector<std::vector<NodeId>> out(centers.size());
  for (std::size_t u = 0; u < assignment.size(); ++u) {
    out[static_cast<std::size_t>(assignment[u])].push_back(static_cast<NodeId>(u));
  }
  return out;
}

double radius_from_uniform(const PaddedDecompositionParams& params, double u) {
  if (!(u >= 0.0 && u < 1.0)) {
    throw InputError("uniform draw must lie in [0, 1)");
  }
  const double n = static_cast<double>(params.n);
  const double z = -params.r * std::log1p(-u * (n - 1.0) / n);
  // -0.0 when r == 0 or u == 0.
  return std::min(std::max(z, 0.0), params.radius_cap);
}

double sample_radius(const PaddedDecompositionParams& params, RngStream& rng) {
  if (params.n < 2) {
    throw InputError("radius density needs n >= 2");
  }
  return radius_from_uniform(params, rng.uniform());
}

double node_radius(const PaddedDecompositionParams& params, std::uint64_t seed,
                   std::uint64_t iteration, NodeId v) {
  if (params.n < 2) {
    return 0.0;
  }
  RngStream rng(seed, StreamTag::Radius, iteration, static_cast<std::uint64_t>(v));
  return sample_radius(params, rng);
}

namespace {

Clustering canonical_clustering(std::vector<NodeId> center_of, std::vector<double> radii,
                                std::vector<int> rank) {
  Clustering c;
  c.centers = center_of;
  std::sort(c.centers.begin(), c.centers.end());
  c.centers.erase(std::unique(c.centers.begin(), c.centers.end()), c.centers.end());
  c.assignment.resize(center_of.size());
  for (std::size_t u = 0; u < center_of.size(); ++u) {
    const auto it = std::lower_bound(c.centers.begin(), c.centers.end(), center_of[u]);
    c.assignment[u] = static_cast<int>(it - c.centers.begin());
  }
  c.radii = std::move(radii);
  c.rank = std::move(rank);
  return c;
}

std::vector<int> draw_rank(int n, std::uint64_t seed, const CentralizedOptions& options) {
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (options.permutation == PermutationMode::Random) {
    RngStream rng(seed, StreamTag::Permutation, options.iteration, 0);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
  }
  std::vector<int> rank(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    rank[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos);
  }
  return rank;
}

}  // namespace

Clustering sample_decomposition_centralized(const DistanceMatrix& dist,
                                            const PaddedDecompositionParams& params,
                                            std::uint64_t seed,
                                            const CentralizedOptions& options) {
  const int n = dist.n();
  if (params.n != n) {
    throw InputError("decomposition parameters were built for a different node count");
  }
  std::vector<double> radii(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) {
    radii[static_cast<std::size_t>(v)] = node_radius(params, seed, options.iteration, v);
  }
  auto rank = draw_rank(n, seed, options);
  std::vector<NodeId> by_rank(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) {
    by_rank[static_cast<std::size_t>(rank[static_cast<std::size_t>(v)])] = v;
  }

  std::vector<NodeId> center_of(static_cast<std::size_t>(n), -1);
  int unassigned = n;
  for (NodeId v : by_rank) {
    if (unassigned == 0) {
      break;
    }
    const double rv = radii[static_cast<std::size_t>(v)];
    for (NodeId u = 0; u < n; ++u) {
      auto& slot = center_of[static_cast<std::size_t>(u)];
      const int d = dist(v, u);
      if (slot < 0 && d != kUnreachable && static_cast<double>(d) <= rv) {
        slot = v;
        --unassigned;
      }
    }
  }
  return canonical_clustering(std::move(center_of), std::move(radii), std::move(rank));
}

Clustering sample_decomposition_centralized(const Graph& g, const PaddedDecompositionParams& params,
                                            std::uint64_t seed,
                                            const CentralizedOptions& options) {
  return sample_decomposition_centralized(DistanceMatrix(g), params, seed, options);
}

std::vector<Clustering> sample_decompositions_centralized(const DistanceMatrix& dist,
                                                          const PaddedDecompositionParams& params,
                                                          std::uint64_t seed, std::size_t count,
                                                          PermutationMode mode, Execution exec) {
  std::vector<Clustering> out(count);
  for_each_index(count, exec, [&](std::size_t i) {
    out[i] = sample_decomposition_centralized(dist, params, seed, {mode, i});
  });
  return out;
}

namespace {

struct FloodItem {
  std::uint32_t run;
  NodeId id;
  int budget;  // hops the receiver may still forward
};

struct FloodEntry {
  NodeId id;
  int budget;
  NodeId parent;
};

/**
   Bundled ball-flooding. A node forwards (id, budget) only if no entry with a
   smaller id and at least the same budget is already known: such an entry
   reaches everything the dominated one would, so the min-id choice of every
   node is unchanged.
 */
struct DecompositionFlood {
  using Message = std::shared_ptr<const std::vector<FloodItem>>;

  struct State {
    std::vector<std::vector<FloodEntry>> known;  // per run
  };

  int schedule = 0;

  static bool accept(std::vector<FloodEntry>& known, const FloodItem& item, NodeId from) {
    for (const auto& e : known) {
      if (e.id == item.id && e.budget >= item.budget) {
        return false;
      }
      if (e.id < item.id && e.budget >= item.budget) {
        return false;
      }
    }
    for (auto& e : known) {
      if (e.id == item.id) {
        e.budget = item.budget;
        e.parent = from;
        return true;
      }
    }
    known.push_back({item.id, item.budget, from});
    return true;
  }

  void step(NodeContext<Message>& ctx, State& state,
            std::span<const Envelope<Message>> inbox) const {
    std::vector<FloodItem> out;
    if (ctx.round() == 0) {
      for (std::size_t run = 0; run < state.known.size(); ++run) {
        const auto& self = state.known[run].front();
        if (self.budget >= 1) {
          out.push_back({static_cast<std::uint32_t>(run), self.id, self.budget - 1});
        }
      }
    } else {
      for (const auto& env : inbox) {
        for (const auto& item : *env.payload) {
          if (accept(state.known[item.run], item, env.from) && item.budget >= 1) {
            out.push_back({item.run, item.id, item.budget - 1});
          }
        }
      }
    }
    if (!out.empty() && ctx.round() < schedule) {
      ctx.send_to_all(std::make_shared<const std::vector<FloodItem>>(std::move(out)));
    }
    if (ctx.round() >= schedule) {
      ctx.finish();
    }
  }

  std::size_t payload_bytes(const Message& msg) const {
    return msg->size() * sizeof(FloodItem);
  }
};

}  // namespace

DistributedDecomposition sample_decompositions_distributed(const Graph& g,
                                                           const PaddedDecompositionParams& params,
                                                           std::uint64_t seed, std::size_t count,
                                                           const SimOptions& options) {
  const int n = g.node_count();
  if (params.n != n) {
    throw InputError("decomposition parameters were built for a different node count");
  }
  std::vector<std::vector<double>> radii(count, std::vector<double>(static_cast<std::size_t>(n)));
  std::vector<DecompositionFlood::State> init(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) {
    auto& known = init[static_cast<std::size_t>(v)].known;
    known.resize(count);
    for (std::size_t run = 0; run < count; ++run) {
      const double rv = node_radius(params, seed, run, v);
      radii[run][static_cast<std::size_t>(v)] = rv;
      known[run].push_back({v, static_cast<int>(std::floor(rv)), -1});
    }
  }

  DecompositionFlood protocol{params.hop_cap()};
  SimOptions sim_options = options;
  sim_options.phase = SimPhase::Decomposition;
  auto sim = run_protocol(g, protocol, std::move(init), sim_options);

  std::vector<int> id_rank(static_cast<std::size_t>(n));
  std::iota(id_rank.begin(), id_rank.end(), 0);

  DistributedDecomposition out;
  out.transcript = sim.transcript;
  out.runs.reserve(count);
  out.routes.assign(count, std::vector<std::vector<RouteEntry>>(static_cast<std::size_t>(n)));
  for (std::size_t run = 0; run < count; ++run) {
    std::vector<NodeId> center_of(static_cast<std::size_t>(n));
    for (NodeId u = 0; u < n; ++u) {
      const auto& known = sim.states[static_cast<std::size_t>(u)].known[run];
      auto& route = out.routes[run][static_cast<std::size_t>(u)];
      route.reserve(known.size());
      for (const auto& e : known) {
        route.push_back({e.id, e.parent});
      }
      std::sort(route.begin(), route.end(),
                [](const RouteEntry& a, const RouteEntry& b) { return a.center < b.center; });
      center_of[static_cast<std::size_t>(u)] = route.front().center;
    }
    out.runs.push_back(canonical_clustering(std::move(center_of), std::move(radii[run]), id_rank));
  }
  return out;
}

NodeId DistributedDecomposition::parent_toward(std::size_t run, NodeId u, NodeId center) const {
  const auto& route = routes.at(run).at(static_cast<std::size_t>(u));
  const auto it = std::lower_bound(
      route.begin(), route.end(), center,
      [](const RouteEntry& e, NodeId c) { return e.center < c; });
  if (it == route.end() || it->center != center) {
    throw InternalError("node " + std::to_string(u) + " has no route to center " +
                        std::to_string(center));
  }
  return it->parent;
}

SingleDecomposition sample_decomposition_distributed(const Graph& g,
                                                     const PaddedDecompositionParams& params,
                                                     std::uint64_t seed,
                                                     const SimOptions& options) {
  auto bundle = sample_decompositions_distributed(g, params, seed, 1, options);
  return {std::move(bundle.runs.front()), bundle.transcript};
}

std::vector<int> cluster_diameters(const Clustering& c, const DistanceMatrix& dist) {
  std::vector<int> out;
  for (const auto& members : c.members()) {
    int diam = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        diam = std::max(diam, dist(members[i], members[j]));
      }
    }
    out.push_back(diam);
  }
  return out;
}

bool is_padded(const Clustering& c, NodeId u, int k, const DistanceMatrix& dist) {
  const int own = c.assignment[static_cast<std::size_t>(u)];
  for (NodeId w = 0; w < dist.n(); ++w) {
    const int d = dist(u, w);
    if (d != kUnreachable && d <= k && c.assignment[static_cast<std::size_t>(w)] != own) {
      return false;
    }
  }
  return true;
}

void check_clustering(const Clustering& c, const PaddedDecompositionParams& params,
                      const DistanceMatrix& dist) {
  const auto n = static_cast<std::size_t>(dist.n());
  if (c.assignment.size() != n || c.radii.size() != n) {
    throw InternalError("clustering does not cover every node");
  }
  if (!std::is_sorted(c.centers.begin(), c.centers.end()) ||
      std::adjacent_find(c.centers.begin(), c.centers.end()) != c.centers.end()) {
    throw InternalError("cluster ids are not canonical");
  }
  std::vector<int> sizes(c.centers.size(), 0);
  for (std::size_t u = 0; u < n; ++u) {
    const int id = c.assignment[u];
    if (id < 0 || id >= c.cluster_count()) {
      throw InternalError("node " + std::to_string(u) + " has no cluster");
    }
    ++sizes[static_cast<std::size_t>(id)];
    const NodeId v = c.centers[static_cast<std::size_t>(id)];
    const double rv = c.radii[static_cast<std::size_t>(v)];
    const int d = dist(static_cast<NodeId>(u), v);
    if (d == kUnreachable || static_cast<double>(d) > rv || rv > params.radius_cap) {
      throw InternalError("node " + std::to_string(u) + " lies outside the radius of center " +
                          std::to_string(v));
    }
  }
  if (std::find(sizes.begin(), sizes.end(), 0) != sizes.end()) {
    throw InternalError("empty cluster");
  }
}

void write_clustering_csv(std::ostream& out, const Clustering& c) {
  out << "node,cluster_id,center,r_v\n";
  for (std::size_t u = 0; u < c.assignment.size(); ++u) {
    out << u << ',' << c.assignment[u] << ',' << c.center_of(static_cast<NodeId>(u)) << ','
        << format_real(c.radii[u]) << '\n';
  }
}

}  // namespace padnet
