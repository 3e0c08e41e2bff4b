#include "padnet/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>

#include "padnet/error.hpp"
#include "padnet/rng.hpp"

namespace padnet {

double edge_probability(int n, double x) {
  const double nn = static_cast<double>(n);
  return std::min(std::sqrt(nn) * std::log(nn) * x, 1.0);
}

double root_probability(int n) {
  const double nn = static_cast<double>(n);
  return std::min(3.0 * std::log(nn) / std::sqrt(nn), 1.0);
}

namespace {

void check_x(const Graph& g, const EdgeVector& x) {
  if (x.size() != static_cast<std::size_t>(g.edge_count())) {
    throw InputError("edge vector length differs from m");
  }
}

NodeId owner(const Graph& g, EdgeId e) {
  const auto& ed = g.edge(e);
  return std::min(ed.from, ed.to);
}

// Edges owned by u, ascending; these are the ones u draws coins for.
std::vector<EdgeId> owned_edges(const Graph& g, NodeId u) {
  std::vector<EdgeId> out;
  for (EdgeId e : g.incident_edges(u)) {
    if (owner(g, e) == u) out.push_back(e);
  }
  return out;
}

template <class Coin>
std::vector<EdgeId> owned_coin_flips(const Graph& g, NodeId u, const RoundingKey& key, Coin&& prob) {
  RngStream rng(key.seed, StreamTag::EdgeCoin, key.trial, static_cast<std::uint64_t>(u));
  std::vector<EdgeId> hit;
  for (EdgeId e : owned_edges(g, u)) {
    if (rng.uniform() < prob(e)) hit.push_back(e);
  }
  return hit;
}

bool is_root(int n, NodeId v, const RoundingKey& key) {
  RngStream rng(key.seed, StreamTag::RootCoin, key.trial, static_cast<std::uint64_t>(v));
  return rng.uniform() < root_probability(n);
}

SpannerOutput assemble(const Graph& g, const std::vector<unsigned char>& mark, std::vector<NodeId> roots) {
  SpannerOutput out;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (mark[static_cast<std::size_t>(e)]) {
      out.edges.push_back(e);
      out.provenance.push_back(mark[static_cast<std::size_t>(e)]);
    }
  }
  out.roots = std::move(roots);
  return out;
}

}  // namespace

SpannerOutput round_spanner(const Graph& g, const EdgeVector& x, int depth, const RoundingKey& key) {
  check_x(g, x);
  if (depth < 0) {
    throw InputError("arborescence depth must be nonnegative");
  }
  const int n = g.node_count();
  std::vector<unsigned char> mark(static_cast<std::size_t>(g.edge_count()), 0);
  std::vector<NodeId> roots;
  for (NodeId u = 0; u < n; ++u) {
    for (EdgeId e : owned_coin_flips(g, u, key, [&](EdgeId f) { return edge_probability(n, x[f]); })) {
      mark[static_cast<std::size_t>(e)] |= kSampled;
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (!is_root(n, v, key)) continue;
    roots.push_back(v);
    for (auto orientation : {Orientation::Out, Orientation::In}) {
      for (EdgeId e : truncated_arborescence(g, v, depth, orientation).edges) {
        mark[static_cast<std::size_t>(e)] |= kArborescence;
      }
    }
  }
  return assemble(g, mark, std::move(roots));
}

namespace {

struct TreeJoin {
  NodeId root;
  Orientation orientation;
};

struct RoundingMessage {
  std::vector<EdgeId> sampled;
  std::vector<TreeJoin> joins;
};

struct RoundingProtocol {
  using Message = std::shared_ptr<const RoundingMessage>;

  struct State {
    std::vector<EdgeId> sampled;  // edges this node owns and kept, or was told about
    // (root, orientation) -> tree edge toward the parent
    std::map<std::pair<NodeId, int>, EdgeId> tree_edge;
    bool root = false;
  };

  const EdgeVector* x = nullptr;
  RoundingKey key;
  int depth = 0;
  int schedule = 1;

  void step(NodeContext<Message>& ctx, State& state, std::span<const Envelope<Message>> inbox) const {
    const Graph& g = ctx.graph();
    const NodeId self = ctx.id();
    const int n = g.node_count();
    std::map<NodeId, RoundingMessage> out;

    auto forward = [&](NodeId root, Orientation o) {
      const auto arcs = o == Orientation::Out ? g.out_arcs(self) : g.in_arcs(self);
      for (const auto& arc : arcs) {
        if (arc.head != root) out[arc.head].joins.push_back({root, o});
      }
    };

    if (ctx.round() == 0) {
      state.sampled = owned_coin_flips(g, self, key, [&](EdgeId e) { return edge_probability(n, (*x)[e]); });
      for (EdgeId e : state.sampled) {
        const auto& ed = g.edge(e);
        out[ed.from == self ? ed.to : ed.from].sampled.push_back(e);
      }
      state.root = is_root(n, self, key);
      if (state.root && depth >= 1) {
        forward(self, Orientation::Out);
        forward(self, Orientation::In);
      }
    } else {
      // Inbox is in sender order, so the first join per tree comes from the
      // smallest-id parent of the previous level.
      std::vector<std::pair<NodeId, int>> fresh;
      for (const auto& env : inbox) {
        for (EdgeId e : env.payload->sampled) state.sampled.push_back(e);
        for (const auto& j : env.payload->joins) {
          if (j.root == self) continue;
          const std::pair<NodeId, int> tree{j.root, static_cast<int>(j.orientation)};
          if (state.tree_edge.count(tree)) continue;
          // Out-trees use the edge parent -> self, in-trees self -> parent.
          const auto found = j.orientation == Orientation::Out ? g.find_edge(env.from, self)
                                                               : g.find_edge(self, env.from);
          if (!found) throw InternalError("tree join along a missing edge");
          state.tree_edge.emplace(tree, *found);
          fresh.push_back(tree);
        }
      }
      if (ctx.round() < depth) {
        for (const auto& [root, o] : fresh) forward(root, static_cast<Orientation>(o));
      }
    }
    for (auto& [to, msg] : out) {
      ctx.send(to, std::make_shared<const RoundingMessage>(std::move(msg)));
    }
    if (ctx.round() >= schedule) ctx.finish();
  }

  std::size_t payload_bytes(const Message& msg) const {
    return msg->sampled.size() * sizeof(EdgeId) + msg->joins.size() * sizeof(TreeJoin);
  }
};

}  // namespace

DistributedRounding round_spanner_distributed(const Graph& g, const EdgeVector& x, int depth,
                                              const RoundingKey& key, const SimOptions& options) {
  check_x(g, x);
  if (depth < 0) {
    throw InputError("arborescence depth must be nonnegative");
  }
  RoundingProtocol protocol{&x, key, depth, std::max(depth, 1)};
  SimOptions sim = options;
  sim.phase = SimPhase::Rounding;
  auto result = run_protocol(g, protocol, std::vector<RoundingProtocol::State>(
                                              static_cast<std::size_t>(g.node_count())),
                             sim);
  std::vector<unsigned char> mark(static_cast<std::size_t>(g.edge_count()), 0);
  std::vector<NodeId> roots;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto& s = result.states[static_cast<std::size_t>(u)];
    if (s.root) roots.push_back(u);
    for (EdgeId e : s.sampled) mark[static_cast<std::size_t>(e)] |= kSampled;
    for (const auto& [tree, e] : s.tree_edge) mark[static_cast<std::size_t>(e)] |= kArborescence;
  }
  return {assemble(g, mark, std::move(roots)), result.transcript};
}

std::vector<EdgeId> round_low_degree(const Graph& g, const EdgeVector& x, int k, const RoundingKey& key) {
  check_x(g, x);
  if (k < 1) {
    throw InputError("k must be at least 1");
  }
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (x[e] > 1.0) {
      throw InputError("x_" + std::to_string(e) + " exceeds 1");
    }
  }
  std::vector<EdgeId> out;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto hit = owned_coin_flips(g, u, key, [&](EdgeId e) {
      return std::pow(x[e], 1.0 / static_cast<double>(k));
    });
    out.insert(out.end(), hit.begin(), hit.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

StretchReport verify_stretch(const Graph& g, const std::vector<EdgeId>& edges, const CpInstance& inst) {
  std::vector<Edge> kept;
  kept.reserve(edges.size());
  for (EdgeId e : edges) kept.push_back(g.edge(e));
  const Graph h(g.node_count(), std::move(kept), g.directed());
  StretchReport rep;
  std::map<NodeId, std::vector<int>> dist;
  for (std::size_t d = 0; d < inst.demands.pairs.size(); ++d) {
    const auto& dem = inst.demands.pairs[d];
    auto it = dist.find(dem.source);
    if (it == dist.end()) {
      it = dist.emplace(dem.source, directed_distances(h, dem.source)).first;
    }
    const int got = it->second[static_cast<std::size_t>(dem.target)];
    if (got > dem.length_bound) {
      rep.valid = false;
      rep.violated.push_back(static_cast<int>(d));
    }
  }
  return rep;
}

EdgeClass classify_edges(const Graph& g, const CpInstance& inst) {
  EdgeClass out;
  const auto n = static_cast<long long>(g.node_count());
  for (const auto& fam : inst.paths.families) {
    std::vector<NodeId> nodes;
    for (const auto& p : fam) nodes.insert(nodes.end(), p.nodes.begin(), p.nodes.end());
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    const auto size = static_cast<long long>(nodes.size());
    out.path_nodes.push_back(static_cast<int>(size));
    out.thick.push_back(size * size >= n);
  }
  return out;
}

void write_provenance_csv(std::ostream& out, const Graph& g, const SpannerOutput& s) {
  out << "edge,from,to,sampled,arborescence\n";
  for (std::size_t i = 0; i < s.edges.size(); ++i) {
    const auto& ed = g.edge(s.edges[i]);
    out << s.edges[i] << ',' << ed.from << ',' << ed.to << ',' << ((s.provenance[i] & kSampled) ? 1 : 0)
        << ',' << ((s.provenance[i] & kArborescence) ? 1 : 0) << '\n';
  }
}

}  // namespace padnet
