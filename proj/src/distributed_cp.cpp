#include "padnet/distributed_cp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "padnet/error.hpp"

namespace padnet {

double solver_lambda(double epsilon) {
  return epsilon * (1.0 - epsilon) / ((2.0 - epsilon) * (1.0 + epsilon));
}

int solver_iterations(double epsilon, int n) {
  const double t = 16.0 * (1.0 - epsilon / 2.0) * (1.0 + epsilon) * std::log(static_cast<double>(n)) /
                   (epsilon * epsilon);
  return std::max(1, static_cast<int>(std::ceil(t)));
}

SolverConfig SolverConfig::make(double epsilon, int n, int max_path_length, std::uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ConfigError("epsilon must lie in (0, 1)");
  }
  if (n < 1) {
    throw ConfigError("graph must have at least one node");
  }
  if (max_path_length < 0) {
    throw ConfigError("D must be nonnegative");
  }
  SolverConfig c;
  c.epsilon = epsilon;
  c.lambda = solver_lambda(epsilon);
  c.t = solver_iterations(epsilon, n);
  c.max_path_length = max_path_length;
  c.seed = seed;
  return c;
}

PaddedDecompositionParams SolverConfig::decomposition(int n) const {
  return PaddedDecompositionParams::make(max_path_length, lambda, n);
}

double SolverConfig::round_bound(int n) const {
  const double D = max_path_length;
  return 5.0 * ((2.0 * D / lambda) * std::log(static_cast<double>(n)) + D) + 10.0;
}

namespace {

// ---- probe: min and max cluster id over B(u, depth) -------------------------

struct ProbeMessage {
  std::vector<NodeId> lo;
  std::vector<NodeId> hi;
};

struct ProbeFlood {
  using Message = std::shared_ptr<const ProbeMessage>;

  struct State {
    std::vector<NodeId> center;  // per run
    ProbeMessage seen;
    std::vector<NodeId> neighbor_center;  // [run * degree + k], filled in round 1
  };

  int depth = 1;

  void step(NodeContext<Message>& ctx, State& state, std::span<const Envelope<Message>> inbox) const {
    const std::size_t runs = state.center.size();
    if (ctx.round() == 1) {
      const auto nb = ctx.neighbors();
      state.neighbor_center.assign(runs * nb.size(), -1);
      for (const auto& env : inbox) {
        const auto k = static_cast<std::size_t>(std::lower_bound(nb.begin(), nb.end(), env.from) -
                                                nb.begin());
        for (std::size_t run = 0; run < runs; ++run) {
          state.neighbor_center[run * nb.size() + k] = env.payload->lo[run];
        }
      }
    }
    for (const auto& env : inbox) {
      for (std::size_t run = 0; run < runs; ++run) {
        state.seen.lo[run] = std::min(state.seen.lo[run], env.payload->lo[run]);
        state.seen.hi[run] = std::max(state.seen.hi[run], env.payload->hi[run]);
      }
    }
    if (ctx.round() < depth) {
      ctx.send_to_all(std::make_shared<const ProbeMessage>(state.seen));
    } else {
      ctx.finish();
    }
  }

  std::size_t payload_bytes(const Message& msg) const {
    return (msg->lo.size() + msg->hi.size()) * sizeof(NodeId);
  }
};

// ---- gather: member records travel to the center along flood parents -------

struct NodeRecord {
  NodeId node;
  std::vector<EdgeId> edges;
  std::vector<int> demands;  // demands whose source is node
  std::size_t bytes;
};

struct GatherItem {
  std::uint32_t run;
  NodeId center;
  bool padded;
  const NodeRecord* record;
};

struct ChildLink {
  std::uint32_t run;
  NodeId center;
  NodeId child;

  friend bool operator<(const ChildLink& a, const ChildLink& b) {
    if (a.run != b.run) return a.run < b.run;
    if (a.center != b.center) return a.center < b.center;
    return a.child < b.child;
  }
};

using ItemBatch = std::vector<GatherItem>;

struct GatherRelay {
  using Message = std::shared_ptr<const ItemBatch>;

  struct State {
    std::vector<NodeId> center;
    std::vector<char> padded;
    std::vector<GatherItem> collected;  // items addressed to this node as a center
    std::vector<ChildLink> children;
  };

  const DistributedDecomposition* dec = nullptr;
  const std::vector<NodeRecord>* records = nullptr;
  int schedule = 0;

  void step(NodeContext<Message>& ctx, State& state, std::span<const Envelope<Message>> inbox) const {
    const NodeId self = ctx.id();
    std::map<NodeId, ItemBatch> out;
    auto route = [&](const GatherItem& item) {
      if (item.center == self) {
        state.collected.push_back(item);
      } else {
        out[dec->parent_toward(item.run, self, item.center)].push_back(item);
      }
    };
    if (ctx.round() == 0) {
      const auto* rec = &(*records)[static_cast<std::size_t>(self)];
      for (std::size_t run = 0; run < state.center.size(); ++run) {
        route({static_cast<std::uint32_t>(run), state.center[run], state.padded[run] != 0, rec});
      }
    }
    for (const auto& env : inbox) {
      for (const auto& item : *env.payload) {
        state.children.push_back({item.run, item.center, env.from});
        route(item);
      }
    }
    if (!out.empty() && ctx.round() >= schedule) {
      throw InternalError("gather did not finish within the hop cap");
    }
    for (auto& [to, batch] : out) {
      ctx.send(to, std::make_shared<const ItemBatch>(std::move(batch)));
    }
    if (ctx.round() >= schedule) {
      std::sort(state.children.begin(), state.children.end());
      state.children.erase(std::unique(state.children.begin(), state.children.end(),
                                       [](const ChildLink& a, const ChildLink& b) {
                                         return !(a < b) && !(b < a);
                                       }),
                           state.children.end());
      ctx.finish();
    }
  }

  std::size_t payload_bytes(const Message& msg) const {
    std::size_t bytes = 0;
    for (const auto& item : *msg) bytes += sizeof(GatherItem) + item.record->bytes;
    return bytes;
  }
};

// ---- broadcast: solutions flow back down the gather tree ---------------------

struct SolutionItem {
  std::uint32_t run;
  NodeId center;
  std::shared_ptr<const CpSolution> solution;
};

using SolutionBatch = std::vector<SolutionItem>;

std::size_t solution_bytes(const CpSolution& s) {
  std::size_t bytes = s.x.size() * sizeof(double);
  for (const auto& f : s.flow) bytes += f.size() * sizeof(double);
  return bytes;
}

struct SolutionRelay {
  using Message = std::shared_ptr<const SolutionBatch>;

  struct State {
    std::vector<NodeId> center;
    std::vector<ChildLink> children;
    std::vector<SolutionItem> own;  // solutions this node is center of, at round 0
    std::vector<std::shared_ptr<const CpSolution>> received;  // per run
  };

  int schedule = 0;

  void step(NodeContext<Message>& ctx, State& state, std::span<const Envelope<Message>> inbox) const {
    std::map<NodeId, SolutionBatch> out;
    auto deliver = [&](const SolutionItem& item) {
      if (state.center[item.run] == item.center) {
        state.received[item.run] = item.solution;
      }
      const ChildLink lo{item.run, item.center, -1};
      for (auto it = std::lower_bound(state.children.begin(), state.children.end(), lo);
           it != state.children.end() && it->run == item.run && it->center == item.center; ++it) {
        out[it->child].push_back(item);
      }
    };
    if (ctx.round() == 0) {
      for (const auto& item : state.own) deliver(item);
    }
    for (const auto& env : inbox) {
      for (const auto& item : *env.payload) deliver(item);
    }
    if (!out.empty() && ctx.round() >= schedule) {
      throw InternalError("broadcast did not finish within the hop cap");
    }
    for (auto& [to, batch] : out) {
      ctx.send(to, std::make_shared<const SolutionBatch>(std::move(batch)));
    }
    if (ctx.round() >= schedule) ctx.finish();
  }

  std::size_t payload_bytes(const Message& msg) const {
    std::size_t bytes = 0;
    for (const auto& item : *msg) bytes += sizeof(SolutionItem) + solution_bytes(*item.solution);
    return bytes;
  }
};

std::vector<NodeId> run_centers(const Clustering& c) {
  std::vector<NodeId> out(c.assignment.size());
  for (std::size_t u = 0; u < out.size(); ++u) out[u] = c.center_of(static_cast<NodeId>(u));
  return out;
}

}  // namespace

ProbeResult decompose_and_probe(const Graph& g, const SolverConfig& config,
                                const DistributedOptions& options) {
  const int n = g.node_count();
  const auto runs = static_cast<std::size_t>(config.t);
  SimOptions sim{options.max_rounds, SimPhase::Decomposition, options.execution};

  ProbeResult out;
  out.decomposition =
      sample_decompositions_distributed(g, config.decomposition(n), config.seed, runs, sim);
  out.transcript = out.decomposition.transcript;

  std::vector<ProbeFlood::State> init(static_cast<std::size_t>(n));
  for (auto& s : init) {
    s.center.resize(runs);
  }
  for (std::size_t run = 0; run < runs; ++run) {
    const auto centers = run_centers(out.decomposition.runs[run]);
    for (NodeId u = 0; u < n; ++u) init[static_cast<std::size_t>(u)].center[run] = centers[static_cast<std::size_t>(u)];
  }
  for (auto& s : init) {
    s.seen.lo = s.center;
    s.seen.hi = s.center;
  }
  ProbeFlood probe{std::max(config.max_path_length, 1)};
  sim.phase = SimPhase::Probe;
  auto result = run_protocol(g, probe, std::move(init), sim);
  out.transcript.append(result.transcript);

  out.padded.assign(runs, std::vector<char>(static_cast<std::size_t>(n), 0));
  for (std::size_t run = 0; run < runs; ++run) {
    for (NodeId u = 0; u < n; ++u) {
      const auto& s = result.states[static_cast<std::size_t>(u)];
      out.padded[run][static_cast<std::size_t>(u)] =
          s.seen.lo[run] == s.center[run] && s.seen.hi[run] == s.center[run];
    }
  }

  // Each endpoint learned the other's center in round 1; both views must agree.
  const auto m = static_cast<std::size_t>(g.edge_count());
  out.edge_centers.assign(runs, std::vector<NodeId>(m, -1));
  auto shared_center = [&](NodeId u, NodeId w, std::size_t run) {
    const auto& s = result.states[static_cast<std::size_t>(u)];
    const auto nb = g.neighbors(u);
    const auto k = static_cast<std::size_t>(std::lower_bound(nb.begin(), nb.end(), w) - nb.begin());
    const NodeId other = s.neighbor_center[run * nb.size() + k];
    return other == s.center[run] ? other : NodeId{-1};
  };
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edge(e);
    for (std::size_t run = 0; run < runs; ++run) {
      const NodeId a = shared_center(ed.from, ed.to, run);
      const NodeId b = shared_center(ed.to, ed.from, run);
      if (a != b) {
        throw InternalError("endpoints of edge " + std::to_string(e) + " disagree on their cluster");
      }
      out.edge_centers[run][static_cast<std::size_t>(e)] = a;
    }
  }
  return out;
}

DistributedResult solve_distributed(const Graph& g, const CpInstance& inst, const SolverConfig& config,
                                    const DistributedOptions& options) {
  const int n = g.node_count();
  const auto m = static_cast<std::size_t>(g.edge_count());
  if (config.max_path_length != inst.demands.max_path_length) {
    throw ConfigError("solver D differs from the instance's longest allowed path");
  }
  const auto runs = static_cast<std::size_t>(config.t);
  SimOptions sim{options.max_rounds, SimPhase::Gather, options.execution};

  auto probe = decompose_and_probe(g, config, options);
  const auto& dec = probe.decomposition;
  const int schedule = config.decomposition(n).hop_cap();

  // Demands live at their source node.
  std::vector<NodeRecord> records(static_cast<std::size_t>(n));
  for (NodeId u = 0; u < n; ++u) {
    auto& r = records[static_cast<std::size_t>(u)];
    r.node = u;
    const auto inc = g.incident_edges(u);
    r.edges.assign(inc.begin(), inc.end());
    r.bytes = sizeof(NodeId) + r.edges.size() * sizeof(Edge);
  }
  for (std::size_t d = 0; d < inst.demands.pairs.size(); ++d) {
    auto& r = records[static_cast<std::size_t>(inst.demands.pairs[d].source)];
    r.demands.push_back(static_cast<int>(d));
    r.bytes += sizeof(Demand);
    for (const auto& p : inst.paths.families[d]) r.bytes += p.nodes.size() * sizeof(NodeId);
  }

  std::vector<GatherRelay::State> ginit(static_cast<std::size_t>(n));
  for (NodeId u = 0; u < n; ++u) {
    auto& s = ginit[static_cast<std::size_t>(u)];
    s.center.resize(runs);
    s.padded.resize(runs);
    for (std::size_t run = 0; run < runs; ++run) {
      s.center[run] = dec.runs[run].center_of(u);
      s.padded[run] = probe.padded[run][static_cast<std::size_t>(u)];
    }
  }
  GatherRelay gather{&dec, &records, schedule};
  auto gathered = run_protocol(g, gather, std::move(ginit), sim);

  DistributedResult out;
  out.transcript = probe.transcript;
  out.transcript.append(gathered.transcript);

  // Centers solve CP(C). A cluster program depends only on N(C) (its edges are
  // those of the allowed paths), so equal demand lists share one solve.
  struct Job {
    std::vector<int> demands;
    std::vector<EdgeId> scope;
    std::shared_ptr<const CpSolution> solution;
  };
  std::map<std::vector<int>, std::size_t> job_of;
  std::vector<Job> jobs;
  out.iterations.resize(runs);
  std::vector<std::vector<std::size_t>> cluster_job(runs);
  for (std::size_t run = 0; run < runs; ++run) {
    auto& rec = out.iterations[run];
    rec.index = static_cast<int>(run);
    rec.clustering = dec.runs[run];
    rec.padded = probe.padded[run];
    rec.clusters.resize(static_cast<std::size_t>(rec.clustering.cluster_count()));
    cluster_job[run].resize(rec.clusters.size());
    for (std::size_t c = 0; c < rec.clusters.size(); ++c) {
      auto& cl = rec.clusters[c];
      cl.center = rec.clustering.centers[c];
      const auto& mine = gathered.states[static_cast<std::size_t>(cl.center)].collected;
      std::vector<char> inside(static_cast<std::size_t>(n), 0);
      for (const auto& item : mine) {
        if (item.run != run) continue;
        cl.members.push_back(item.record->node);
        inside[static_cast<std::size_t>(item.record->node)] = 1;
        if (item.padded) {
          cl.demands.insert(cl.demands.end(), item.record->demands.begin(), item.record->demands.end());
        }
      }
      std::sort(cl.members.begin(), cl.members.end());
      std::sort(cl.demands.begin(), cl.demands.end());
      std::vector<EdgeId> scope;
      for (NodeId u : cl.members) {
        for (EdgeId e : records[static_cast<std::size_t>(u)].edges) {
          const auto& ed = g.edge(e);
          if (inside[static_cast<std::size_t>(ed.from)] && inside[static_cast<std::size_t>(ed.to)]) {
            scope.push_back(e);
          }
        }
      }
      auto [it, fresh] = job_of.emplace(cl.demands, jobs.size());
      if (fresh) {
        jobs.push_back({cl.demands, std::move(scope), nullptr});
      }
      cluster_job[run][c] = it->second;
    }
    // Gathered membership must match the decomposition.
    const auto members = rec.clustering.members();
    for (std::size_t c = 0; c < rec.clusters.size(); ++c) {
      if (members[c] != rec.clusters[c].members) {
        throw InternalError("center " + std::to_string(rec.clusters[c].center) +
                            " gathered the wrong member set in iteration " + std::to_string(run));
      }
    }
  }

  if (options.cache) {
    for (auto& job : jobs) job.solution = options.cache->find(job.demands);
  }
  for_each_index(jobs.size(), options.execution, [&](std::size_t j) {
    auto& job = jobs[j];
    if (job.solution) return;
    std::vector<ScopedDemand> dems;
    for (int d : job.demands) dems.push_back({d, inst.paths.families[static_cast<std::size_t>(d)]});
    const auto prog = build_cp_program(g, inst.objective, job.scope, dems, inst.demands.pairs.size());
    job.solution = std::make_shared<const CpSolution>(solve_cp(prog, g, options.cp));
  });
  out.distinct_programs = static_cast<int>(jobs.size());
  if (options.cache) {
    for (const auto& job : jobs) options.cache->insert(job.demands, job.solution);
  }

  std::vector<SolutionRelay::State> binit(static_cast<std::size_t>(n));
  for (NodeId u = 0; u < n; ++u) {
    auto& s = binit[static_cast<std::size_t>(u)];
    s.center = gathered.states[static_cast<std::size_t>(u)].center;
    s.children = std::move(gathered.states[static_cast<std::size_t>(u)].children);
    s.received.resize(runs);
  }
  for (std::size_t run = 0; run < runs; ++run) {
    auto& rec = out.iterations[run];
    for (std::size_t c = 0; c < rec.clusters.size(); ++c) {
      auto& cl = rec.clusters[c];
      cl.solution = jobs[cluster_job[run][c]].solution;
      binit[static_cast<std::size_t>(cl.center)].own.push_back(
          {static_cast<std::uint32_t>(run), cl.center, cl.solution});
    }
  }
  SolutionRelay relay{schedule};
  sim.phase = SimPhase::Broadcast;
  auto broadcast = run_protocol(g, relay, std::move(binit), sim);
  out.transcript.append(broadcast.transcript);

  // Every node averages over I_{u,v} for its incident edges; both endpoints
  // must reach the same value.
  out.padded_count.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t run = 0; run < runs; ++run) {
    for (NodeId u = 0; u < n; ++u) {
      if (!broadcast.states[static_cast<std::size_t>(u)].received[run]) {
        throw InternalError("node " + std::to_string(u) + " received no solution in iteration " +
                            std::to_string(run));
      }
      out.padded_count[static_cast<std::size_t>(u)] += probe.padded[run][static_cast<std::size_t>(u)];
    }
  }
  const double scale = (1.0 + config.epsilon) / static_cast<double>(config.t);
  auto local_value = [&](NodeId u, EdgeId e, int& shared) {
    double sum = 0.0;
    shared = 0;
    const auto& got = broadcast.states[static_cast<std::size_t>(u)].received;
    for (std::size_t run = 0; run < runs; ++run) {
      if (probe.edge_centers[run][static_cast<std::size_t>(e)] < 0) continue;
      ++shared;
      sum += (*got[run]).x[e];
    }
    return std::min(1.0, scale * sum);
  };
  std::vector<double> x(m, 0.0);
  out.shared_count.assign(m, 0);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    int shared_tail = 0;
    int shared_head = 0;
    const double a = local_value(g.edge(e).from, e, shared_tail);
    const double b = local_value(g.edge(e).to, e, shared_head);
    if (a != b || shared_tail != shared_head) {
      throw InternalError("endpoints of edge " + std::to_string(e) + " computed different values");
    }
    x[static_cast<std::size_t>(e)] = a;
    out.shared_count[static_cast<std::size_t>(e)] = shared_tail;
  }
  out.objective = evaluate_objective(inst.objective, std::span<const double>(x), g);
  out.x = EdgeVector(std::move(x));
  return out;
}

std::vector<double> implied_flow(const DistributedResult& result, const CpInstance& inst, int demand) {
  if (demand < 0 || static_cast<std::size_t>(demand) >= inst.demands.pairs.size()) {
    throw InputError("demand index out of range");
  }
  const auto d = static_cast<std::size_t>(demand);
  const NodeId u = inst.demands.pairs[d].source;
  std::vector<double> flow(inst.paths.families[d].size(), 0.0);
  int count = 0;
  for (const auto& rec : result.iterations) {
    if (!rec.padded[static_cast<std::size_t>(u)]) continue;
    const auto& cl = rec.clusters[static_cast<std::size_t>(rec.clustering.assignment[static_cast<std::size_t>(u)])];
    const auto& f = cl.solution->flow[d];
    if (f.size() != flow.size()) {
      throw InternalError("padded demand " + std::to_string(demand) + " missing from its cluster program");
    }
    for (std::size_t p = 0; p < flow.size(); ++p) flow[p] += f[p];
    ++count;
  }
  if (count == 0) {
    throw NoCertificateError("source " + std::to_string(u) + " of demand " + std::to_string(demand) +
                             " was padded in no iteration");
  }
  for (double& v : flow) v /= count;
  return flow;
}

std::vector<std::vector<double>> implied_flows(const DistributedResult& result, const CpInstance& inst) {
  std::vector<std::vector<double>> out;
  out.reserve(inst.demands.pairs.size());
  for (std::size_t d = 0; d < inst.demands.pairs.size(); ++d) {
    out.push_back(implied_flow(result, inst, static_cast<int>(d)));
  }
  return out;
}

ConcentrationReport concentration_report(const std::vector<int>& padded_count, const CpInstance& inst,
                                         const SolverConfig& config) {
  ConcentrationReport rep;
  rep.threshold = static_cast<double>(config.t) / (1.0 + config.epsilon);
  rep.node_pass.resize(padded_count.size());
  int passing = 0;
  for (std::size_t u = 0; u < padded_count.size(); ++u) {
    rep.node_pass[u] = static_cast<double>(padded_count[u]) > rep.threshold;
    passing += rep.node_pass[u];
  }
  rep.node_pass_fraction =
      padded_count.empty() ? 1.0 : static_cast<double>(passing) / static_cast<double>(padded_count.size());
  std::vector<char> source(padded_count.size(), 0);
  for (const auto& dem : inst.demands.pairs) source[static_cast<std::size_t>(dem.source)] = 1;
  for (std::size_t u = 0; u < source.size(); ++u) {
    if (!source[u]) continue;
    ++rep.sources;
    if (rep.node_pass[u]) ++rep.sources_passing;
  }
  rep.all_sources_pass = rep.sources_passing == rep.sources;
  return rep;
}

}  // namespace padnet
