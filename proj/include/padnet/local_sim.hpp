#pragma once

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "padnet/error.hpp"
#include "padnet/graph.hpp"
#include "padnet/parallel.hpp"

namespace padnet {

enum class SimPhase : std::size_t {
  Decomposition = 0,
  Probe,
  Gather,
  Broadcast,
  Rounding,
  Other,
};

inline constexpr std::size_t kSimPhaseCount = 6;

std::string_view phase_name(SimPhase phase);

/**
   Round accounting for one or more protocol runs executed back to back.
   rounds_elapsed always equals the sum of the per-phase counts.
 */
struct RoundTranscript {
  std::array<int, kSimPhaseCount> phase_rounds{};
  int rounds_elapsed = 0;
  std::uint64_t messages = 0;
  std::size_t max_payload_bytes = 0;

  int rounds(SimPhase phase) const { return phase_rounds[static_cast<std::size_t>(phase)]; }
  void charge(SimPhase phase, int rounds);
  // Sequential composition: rounds add, payload maximum is kept.
  void append(const RoundTranscript& later);
  bool consistent() const;

  friend bool operator==(const RoundTranscript&, const RoundTranscript&) = default;
};

template <class Message>
struct Envelope {
  NodeId from;
  Message payload;
};

/**
   What a node may do during one step: address messages to communication
   neighbors and declare itself finished. A finished node is halted; it is not
   stepped again and messages addressed to it are dropped.
 */
template <class Message>
class NodeContext {
 public:
  NodeContext(const Graph& g, NodeId self, int round,
              std::vector<std::pair<NodeId, Message>>& outbox)
      : graph_(g), self_(self), round_(round), outbox_(outbox) {}

  NodeId id() const noexcept { return self_; }
  int round() const noexcept { return round_; }
  const Graph& graph() const noexcept { return graph_; }
  std::span<const NodeId> neighbors() const { return graph_.neighbors(self_); }

  void send(NodeId to, Message msg) {
    const auto nb = graph_.neighbors(self_);
    if (!std::binary_search(nb.begin(), nb.end(), to)) {
      throw ProtocolError("node " + std::to_string(self_) + " addressed non-neighbor " +
                          std::to_string(to));
    }
    outbox_.emplace_back(to, std::move(msg));
  }

  void send_to_all(const Message& msg) {
    for (NodeId w : graph_.neighbors(self_)) {
      outbox_.emplace_back(w, msg);
    }
  }

  void finish() noexcept { finished_ = true; }
  bool finished() const noexcept { return finished_; }

 private:
  const Graph& graph_;
  NodeId self_;
  int round_;
  std::vector<std::pair<NodeId, Message>>& outbox_;
  bool finished_ = false;
};

/**
   A LOCAL-model protocol: per-node State, a Message type, a step function and
   a payload size measure used for transcript statistics. step must depend only
   on (state, inbox); randomness lives in the state as keyed RngStreams.
 */
template <class P>
concept LocalProtocol = requires(const P& p, typename P::State& state,
                                 NodeContext<typename P::Message>& ctx,
                                 std::span<const Envelope<typename P::Message>> inbox,
                                 const typename P::Message& msg) {
  { p.step(ctx, state, inbox) };
  { p.payload_bytes(msg) } -> std::convertible_to<std::size_t>;
};

struct SimOptions {
  int max_rounds = 1 << 20;
  SimPhase phase = SimPhase::Other;
  Execution execution = Execution::Serial;
};

template <class State>
struct SimResult {
  std::vector<State> states;
  RoundTranscript transcript;
};

/**
   Synchronous round engine. Round 0 is a local step with empty inboxes;
   messages produced in a step are delivered at the next round boundary, which
   is what a round counts. Runs until every node has finished.

   Within a round nodes may step in parallel; delivery is a serial barrier in
   sender order, so inbox contents and order are identical to a sequential run.
 */
template <LocalProtocol P>
SimResult<typename P::State> run_protocol(const Graph& g, const P& protocol,
                                          std::vector<typename P::State> init,
                                          const SimOptions& options = {}) {
  using Message = typename P::Message;
  const auto n = static_cast<std::size_t>(g.node_count());
  if (init.size() != n) {
    throw InputError("one initial state per node required");
  }
  if (options.max_rounds < 0) {
    throw InputError("max_rounds must be nonnegative");
  }

  SimResult<typename P::State> result{std::move(init), {}};
  auto& states = result.states;
  std::vector<std::vector<Envelope<Message>>> inbox(n);
  std::vector<std::vector<std::pair<NodeId, Message>>> outbox(n);
  std::vector<char> done(n, 0);

  auto step_all = [&](int round) {
    for_each_index(n, options.execution, [&](std::size_t u) {
      if (done[u]) {
        return;
      }
      NodeContext<Message> ctx(g, static_cast<NodeId>(u), round, outbox[u]);
      protocol.step(ctx, states[u], std::span<const Envelope<Message>>(inbox[u]));
      if (ctx.finished()) {
        done[u] = 1;
      }
    });
  };

  step_all(0);
  int rounds = 0;
  std::uint64_t messages = 0;
  std::size_t max_payload = 0;
  while (std::find(done.begin(), done.end(), 0) != done.end()) {
    if (rounds >= options.max_rounds) {
      throw TimeoutError("protocol did not terminate within " +
                         std::to_string(options.max_rounds) + " rounds");
    }
    for (auto& box : inbox) {
      box.clear();
    }
    for (std::size_t u = 0; u < n; ++u) {
      for (auto& [to, msg] : outbox[u]) {
        ++messages;
        max_payload = std::max(max_payload, static_cast<std::size_t>(protocol.payload_bytes(msg)));
        if (!done[static_cast<std::size_t>(to)]) {
          inbox[static_cast<std::size_t>(to)].push_back({static_cast<NodeId>(u), std::move(msg)});
        }
      }
      outbox[u].clear();
    }
    ++rounds;
    step_all(rounds);
  }
  result.transcript.charge(options.phase, rounds);
  result.transcript.messages = messages;
  result.transcript.max_payload_bytes = max_payload;
  return result;
}

struct BroadcastResult {
  // held[u] is the payload received by u; empty for nodes outside the cluster.
  std::vector<std::optional<std::string>> held;
  RoundTranscript transcript;
};

/**
   Floods payload from center to every node of cluster using only edges of the
   cluster-induced subgraph. Rounds charged equal the eccentricity of center
   inside that subgraph. Throws ProtocolError if the cluster is disconnected or
   does not contain center.
 */
BroadcastResult broadcast_in_cluster(const Graph& g, std::span<const NodeId> cluster,
                                     NodeId center, const std::string& payload,
                                     SimPhase phase = SimPhase::Broadcast);

struct TranscriptRow {
  std::uint64_t seed = 0;
  int n = 0;
  int m = 0;
  double epsilon = 0.0;
  int max_path_length = 0;
  RoundTranscript transcript;
};

void write_transcript_csv_header(std::ostream& out);
void write_transcript_csv_row(std::ostream& out, const TranscriptRow& row);

}  // namespace padnet
