#include "padnet/local_sim.hpp"

#include <memory>
#include <ostream>

#include "padnet/text.hpp"

namespace padnet {

std::string_view phase_name(SimPhase phase) {
  switch (phase) {
    case SimPhase::Decomposition:
      return "decomposition";
    case SimPhase::Probe:
      return "probe";
    case SimPhase::Gather:
      return "gather";
    case SimPhase::Broadcast:
      return "broadcast";
    case SimPhase::Rounding:
      return "rounding";
    case SimPhase::Other:
      return "other";
  }
  return "unknown";
}

void RoundTranscript::charge(SimPhase phase, int rounds) {
  phase_rounds[static_cast<std::size_t>(phase)] += rounds;
  rounds_elapsed += rounds;
}

void RoundTranscript::append(const RoundTranscript& later) {
  for (std::size_t i = 0; i < kSimPhaseCount; ++i) {
    phase_rounds[i] += later.phase_rounds[i];
  }
  rounds_elapsed += later.rounds_elapsed;
  messages += later.messages;
  max_payload_bytes = std::max(max_payload_bytes, later.max_payload_bytes);
}

bool RoundTranscript::consistent() const {
  int total = 0;
  for (int r : phase_rounds) {
    if (r < 0) {
      return false;
    }
    total += r;
  }
  return total == rounds_elapsed;
}

namespace {

struct ClusterFlood {
  using Message = std::shared_ptr<const std::string>;

  struct State {
    bool member = false;
    bool is_center = false;
    Message held;
  };

  const std::vector<char>* inside = nullptr;

  void step(NodeContext<Message>& ctx, State& state,
            std::span<const Envelope<Message>> inbox) const {
    if (!state.member) {
      ctx.finish();
      return;
    }
    if (!state.held && !inbox.empty()) {
      state.held = inbox.front().payload;
    }
    if (state.held) {
      for (NodeId w : ctx.neighbors()) {
        if ((*inside)[static_cast<std::size_t>(w)]) {
          ctx.send(w, state.held);
        }
      }
      ctx.finish();
    }
  }

  std::size_t payload_bytes(const Message& msg) const { return msg ? msg->size() : 0; }
};

}  // namespace

BroadcastResult broadcast_in_cluster(const Graph& g, std::span<const NodeId> cluster,
                                     NodeId center, const std::string& payload,
                                     SimPhase phase) {
  g.check_node(center);
  const auto inside = node_mask(g.node_count(), cluster);
  if (!inside[static_cast<std::size_t>(center)]) {
    throw ProtocolError("cluster center " + std::to_string(center) + " is not in the cluster");
  }

  // Reachability inside the induced subgraph; the flood would otherwise never end.
  std::vector<char> reached(inside.size(), 0);
  std::vector<NodeId> stack{center};
  reached[static_cast<std::size_t>(center)] = 1;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (NodeId w : g.neighbors(u)) {
      const auto wi = static_cast<std::size_t>(w);
      if (inside[wi] && !reached[wi]) {
        reached[wi] = 1;
        stack.push_back(w);
      }
    }
  }
  for (NodeId u : cluster) {
    if (!reached[static_cast<std::size_t>(u)]) {
      throw ProtocolError("cluster is disconnected: node " + std::to_string(u) +
                          " unreachable from center " + std::to_string(center));
    }
  }

  ClusterFlood protocol{&inside};
  std::vector<ClusterFlood::State> init(inside.size());
  for (std::size_t u = 0; u < inside.size(); ++u) {
    init[u].member = inside[u] != 0;
  }
  auto& root = init[static_cast<std::size_t>(center)];
  root.is_center = true;
  root.held = std::make_shared<const std::string>(payload);

  auto sim = run_protocol(g, protocol, std::move(init), {.phase = phase});
  BroadcastResult out;
  out.held.resize(inside.size());
  for (std::size_t u = 0; u < inside.size(); ++u) {
    if (sim.states[u].held) {
      out.held[u] = *sim.states[u].held;
    }
  }
  out.transcript = sim.transcript;
  return out;
}

void write_transcript_csv_header(std::ostream& out) {
  out << "seed,n,m,epsilon,D";
  for (std::size_t i = 0; i < kSimPhaseCount; ++i) {
    out << ',' << phase_name(static_cast<SimPhase>(i)) << "_rounds";
  }
  out << ",total_rounds,messages,max_payload_bytes\n";
}

void write_transcript_csv_row(std::ostream& out, const TranscriptRow& row) {
  out << row.seed << ',' << row.n << ',' << row.m << ',' << format_real(row.epsilon) << ','
      << row.max_path_length;
  for (int r : row.transcript.phase_rounds) {
    out << ',' << r;
  }
  out << ',' << row.transcript.rounds_elapsed << ',' << row.transcript.messages << ','
      << row.transcript.max_payload_bytes << '\n';
}

}  // namespace padnet
