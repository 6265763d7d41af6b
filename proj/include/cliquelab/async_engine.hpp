#pragma once

// Discrete-event executor for the asynchronous clique.
//
// Time is fixed point: kTicksPerUnit ticks per unit of time, where a unit is
// the upper bound on a single message delay. Links are FIFO. Handlers run
// atomically at the timestamp of their event; simultaneous events fire in
// creation order.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cliquelab/net_model.hpp"
#include "cliquelab/node.hpp"
#include "cliquelab/payload.hpp"

namespace cliquelab {

using SimTime = std::int64_t;

inline constexpr SimTime kTicksPerUnit = SimTime{1} << 32;

inline double to_units(SimTime t) { return static_cast<double>(t) / static_cast<double>(kTicksPerUnit); }
inline SimTime from_units(double units) {
  return static_cast<SimTime>(units * static_cast<double>(kTicksPerUnit));
}

class AsyncContext {
 public:
  virtual ~AsyncContext() = default;
  virtual SimTime now() const = 0;
  virtual void send(Port port, const Payload& payload) = 0;
};

class AsyncNode : public DecisionState {
 public:
  virtual void on_wake(AsyncContext& ctx, WakeCause cause) = 0;
  virtual void on_message(AsyncContext& ctx, Port port, const Payload& payload) = 0;
};

class AsyncProtocol {
 public:
  virtual ~AsyncProtocol() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<AsyncNode> make_node(const NodeContext& ctx) const = 0;
};

using AsyncProtocolPtr = std::shared_ptr<const AsyncProtocol>;

// Read-only view of the run handed to schedulers. Adaptive policies may
// inspect node objects (including their random generators) and payloads.
class AsyncWorld {
 public:
  virtual ~AsyncWorld() = default;
  virtual int node_count() const = 0;
  virtual bool awake(NodeIndex u) const = 0;
  virtual Decision decision(NodeIndex u) const = 0;
  virtual const AsyncNode& node(NodeIndex u) const = 0;
};

struct SendInfo {
  Endpoint from;
  Endpoint to;
  Payload payload;
  SimTime send_time = 0;
  // Latest delivery time already scheduled on the directed link from.node ->
  // to.node, or nullopt if the link is unused so far.
  std::optional<SimTime> link_last_delivery;
};

// Assigns a delivery time in (send_time, send_time + 1 unit], no earlier than
// the previous delivery on the same link.
class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual std::string name() const = 0;
  virtual SimTime delivery_time(const SendInfo& msg, const AsyncWorld& world) = 0;
};

using SchedulerPtr = std::shared_ptr<Scheduler>;

// Raises a proposed delivery time to the minimum that keeps the link FIFO.
inline SimTime fifo_clamp(const SendInfo& msg, SimTime proposed) {
  if (msg.link_last_delivery && *msg.link_last_delivery > proposed) return *msg.link_last_delivery;
  return proposed;
}

SchedulerPtr unit_delay();
SchedulerPtr uniform_random_delay(std::uint64_t seed);

// Delegates to `policy`, which returns a delay in units. The FIFO order is
// restored by raising; a delay outside (0,1] aborts the run.
SchedulerPtr adaptive(std::string name, std::function<double(const SendInfo&, const AsyncWorld&)> policy);

enum class TimeAccounting : std::uint8_t { from_first_wake, from_last_spontaneous_wake };

struct SpontaneousWake {
  NodeIndex node = 0;
  SimTime time = 0;
};

struct AsyncConfig {
  IdAssignment ids;
  PortMapping mapping;
  std::vector<SpontaneousWake> wake_schedule;
  SchedulerPtr scheduler;
  std::uint64_t seed = 0;
  TimeAccounting time_accounting = TimeAccounting::from_first_wake;
  std::int64_t max_events = 0;  // 0 selects 64 n^2
  bool trace = false;
};

struct AsyncTraceEvent {
  SimTime time = 0;
  TraceKind kind = TraceKind::send;
  NodeIndex node = 0;
  Port port = 0;
  Payload payload;
  std::uint64_t msg_id = 0;  // pairs a send with its delivery
  NodeIndex peer = -1;       // receiver for send, sender for deliver
  SimTime send_time = 0;     // deliver events
  Decision decision = Decision::undecided;
};

struct AsyncOutcome {
  std::vector<Decision> decisions;
  std::vector<std::optional<SimTime>> wake_time;
  std::vector<std::optional<SimTime>> decide_time;
  SimTime origin = 0;
  SimTime last_delivery = 0;
  double elapsed_time = 0.0;  // units, from origin to last delivery
  std::int64_t messages_total = 0;
  std::int64_t events_processed = 0;
  int leader_count = 0;
  bool exhausted = false;        // max_events hit
  std::optional<std::string> scheduler_fault;  // run aborted
  std::vector<std::string> protocol_faults;
  std::vector<AsyncTraceEvent> trace;
  // Final node states, for per-run predicates over protocol internals.
  std::vector<std::shared_ptr<const AsyncNode>> nodes;

  // Latest wake-up relative to the origin, or nullopt if a node never woke.
  std::optional<double> all_awake_by() const;
};

// Throws ConfigError on an inconsistent configuration.
AsyncOutcome run_async(const AsyncProtocol& protocol, const AsyncConfig& cfg);

bool decided_all(const AsyncOutcome& outcome);

// One JSON object per line: {time, kind, node, port, payload}.
void write_trace_jsonl(std::ostream& os, std::span<const AsyncTraceEvent> trace);

struct TraceAudit {
  std::int64_t deliveries = 0;
  std::int64_t delay_violations = 0;
  std::int64_t fifo_violations = 0;
  std::int64_t unmatched = 0;
};

// Independent check of the delay bound and per-link FIFO order over a trace.
TraceAudit audit_trace(std::span<const AsyncTraceEvent> trace);

}  // namespace cliquelab
