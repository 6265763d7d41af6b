#pragma once

// Synchronous round executor.
//
// Round r: every awake, unhalted node emits its outbox; all round-r messages
// are delivered at the end of round r; every awake node then processes its
// round-r inbox and may decide or halt. A sleeping node that receives a
// message in round r wakes at the end of round r, sees that inbox, and sends
// for the first time in round r+1.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cliquelab/net_model.hpp"
#include "cliquelab/node.hpp"
#include "cliquelab/payload.hpp"

namespace cliquelab {

struct PortMessage {
  Port port = 0;
  Payload payload;
};

class SyncNode : public DecisionState {
 public:
  virtual void on_wake(int round, WakeCause cause) {
    (void)round;
    (void)cause;
  }
  virtual std::vector<PortMessage> on_send(int round) = 0;
  // Inbox is sorted by receiving port.
  virtual void on_receive(int round, std::span<const PortMessage> inbox) = 0;
};

class SyncProtocol {
 public:
  virtual ~SyncProtocol() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<SyncNode> make_node(const NodeContext& ctx) const = 0;
};

using SyncProtocolPtr = std::shared_ptr<const SyncProtocol>;

// Resolves a send endpoint to its receiver. Adaptive implementations may
// decide the wiring of a port when it is first opened.
class PortWiring {
 public:
  virtual ~PortWiring() = default;
  // Called once per round, before any route() of the round, with every
  // endpoint a node sends on in this round (duplicates possible).
  virtual void on_round_begin(int round, std::span<const Endpoint> planned) {
    (void)round;
    (void)planned;
  }
  virtual Endpoint route(Endpoint from) = 0;
  // Called once per round after all deliveries of the round.
  virtual void on_round_end(int round, const CommGraph& graph, std::int64_t messages_so_far) {
    (void)round;
    (void)graph;
    (void)messages_so_far;
  }
};

struct SyncWake {
  bool simultaneous = true;
  std::vector<NodeIndex> nodes;  // adversarial round-1 wake set

  static SyncWake all() { return {}; }
  static SyncWake adversarial(std::vector<NodeIndex> nodes) { return {false, std::move(nodes)}; }
};

struct SyncConfig {
  IdAssignment ids;
  std::variant<PortMapping, std::shared_ptr<PortWiring>> wiring;
  SyncWake wake;
  std::uint64_t seed = 0;
  int max_rounds = 0;  // 0 selects 4n
  bool trace = false;
};

struct SyncTraceEvent {
  int round = 0;
  TraceKind kind = TraceKind::send;
  NodeIndex node = 0;
  Port port = 0;  // sender port for send, receiver port for deliver
  Payload payload;
  Decision decision = Decision::undecided;  // decide events
};

struct SyncFault {
  int round = 0;
  NodeIndex node = 0;
  std::string what;
};

struct SyncOutcome {
  std::vector<Decision> decisions;
  std::vector<int> wake_round;  // 0 for nodes that never woke
  int rounds_used = 0;
  std::int64_t messages_total = 0;
  std::vector<std::int64_t> per_round_messages;
  CommGraph comm_graph;
  std::vector<SyncTraceEvent> trace;
  std::vector<SyncFault> faults;
  bool finished = true;  // false when max_rounds ran out with undecided nodes
};

// Throws ConfigError on an inconsistent configuration.
SyncOutcome run_sync(const SyncProtocol& protocol, const SyncConfig& cfg);

// Expands each inner round into n sub-rounds, one outgoing message per
// sub-round, buffering receptions until the end of the block.
SyncProtocolPtr single_send_transform(SyncProtocolPtr inner);

int leader_count(const SyncOutcome& outcome);
bool decided_all(const SyncOutcome& outcome);

// One JSON object per line: {round, kind, node, port, payload}.
void write_trace_jsonl(std::ostream& os, std::span<const SyncTraceEvent> trace);

}  // namespace cliquelab
