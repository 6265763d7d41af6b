#include "cliquelab/async_engine.hpp"

#include <algorithm>
#include <ostream>
#include <queue>

#include <json.hpp>

#include "cliquelab/errors.hpp"
#include "cliquelab/rng.hpp"

namespace cliquelab {

namespace {

class UnitDelay final : public Scheduler {
 public:
  std::string name() const override { return "unit"; }
  SimTime delivery_time(const SendInfo& msg, const AsyncWorld&) override {
    return fifo_clamp(msg, msg.send_time + kTicksPerUnit);
  }
};

class UniformRandomDelay final : public Scheduler {
 public:
  explicit UniformRandomDelay(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  SimTime delivery_time(const SendInfo& msg, const AsyncWorld&) override {
    std::uniform_int_distribution<SimTime> delay(1, kTicksPerUnit);
    return fifo_clamp(msg, msg.send_time + delay(rng_));
  }

 private:
  Rng rng_;
};

class AdaptiveScheduler final : public Scheduler {
 public:
  AdaptiveScheduler(std::string name, std::function<double(const SendInfo&, const AsyncWorld&)> policy)
      : name_(std::move(name)), policy_(std::move(policy)) {}
  std::string name() const override { return name_; }
  SimTime delivery_time(const SendInfo& msg, const AsyncWorld& world) override {
    const double delay = policy_(msg, world);
    if (!(delay > 0.0) || delay > 1.0) {
      // Out-of-contract value; the engine reports it.
      return msg.send_time + (delay > 1.0 ? 2 * kTicksPerUnit : 0);
    }
    return fifo_clamp(msg, msg.send_time + std::max<SimTime>(1, from_units(delay)));
  }

 private:
  std::string name_;
  std::function<double(const SendInfo&, const AsyncWorld&)> policy_;
};

struct Event {
  SimTime time = 0;
  std::uint64_t seq = 0;
  bool deliver = false;
  NodeIndex node = 0;
  Port port = 0;
  Payload payload;
  NodeIndex from = -1;
  SimTime send_time = 0;
};

// Heap entries stay small; event bodies live in a slot pool.
struct EventKey {
  SimTime time = 0;
  std::uint64_t seq = 0;
  std::uint32_t slot = 0;
};

struct KeyLater {
  bool operator()(const EventKey& a, const EventKey& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

class Runner final : public AsyncWorld {
 public:
  Runner(const AsyncProtocol& protocol, const AsyncConfig& cfg) : cfg_(cfg), n_(cfg.ids.size()) {
    const auto un = static_cast<std::size_t>(n_);
    nodes_.reserve(un);
    for (NodeIndex u = 0; u < n_; ++u) {
      nodes_.push_back(protocol.make_node(
          NodeContext{cfg.ids[u], n_, derive_seed(cfg.seed, Stream::node_tape, static_cast<std::uint64_t>(u))}));
    }
    awake_.assign(un, 0);
    link_last_.assign(un * un, 0);
    out_.decisions.assign(un, Decision::undecided);
    out_.wake_time.assign(un, std::nullopt);
    out_.decide_time.assign(un, std::nullopt);
  }

  int node_count() const override { return n_; }
  bool awake(NodeIndex u) const override { return awake_[static_cast<std::size_t>(u)] != 0; }
  Decision decision(NodeIndex u) const override { return nodes_[static_cast<std::size_t>(u)]->decision(); }
  const AsyncNode& node(NodeIndex u) const override { return *nodes_[static_cast<std::size_t>(u)]; }

  AsyncOutcome run() {
    SimTime first = cfg_.wake_schedule.front().time;
    SimTime last = first;
    for (const auto& w : cfg_.wake_schedule) {
      first = std::min(first, w.time);
      last = std::max(last, w.time);
      push({w.time, 0, false, w.node, 0, {}, -1, w.time});
    }
    out_.origin = cfg_.time_accounting == TimeAccounting::from_first_wake ? first : last;
    const std::int64_t max_events =
        cfg_.max_events > 0 ? cfg_.max_events : 64LL * static_cast<std::int64_t>(n_) * n_;

    while (!queue_.empty() && !out_.scheduler_fault) {
      if (out_.events_processed >= max_events) {
        out_.exhausted = true;
        break;
      }
      const EventKey key = queue_.top();
      queue_.pop();
      const Event ev = pool_[key.slot];
      free_.push_back(key.slot);
      ++out_.events_processed;
      now_ = ev.time;
      current_ = ev.node;
      auto& node = *nodes_[static_cast<std::size_t>(ev.node)];
      if (ev.deliver) {
        out_.last_delivery = std::max(out_.last_delivery, ev.time);
        if (cfg_.trace) {
          out_.trace.push_back({ev.time, TraceKind::deliver, ev.node, ev.port, ev.payload, ev.seq, ev.from,
                                ev.send_time, Decision::undecided});
        }
        if (!awake(ev.node)) wake(ev.node, WakeCause::message);
        guarded(ev.node, [&] { node.on_message(*ctx_, ev.port, ev.payload); });
      } else if (!awake(ev.node)) {
        wake(ev.node, WakeCause::adversary);
      }
      note_decision(ev.node);
    }

    if (out_.last_delivery > out_.origin) out_.elapsed_time = to_units(out_.last_delivery - out_.origin);
    out_.leader_count = leader_count(std::span<const Decision>(out_.decisions));
    out_.nodes.reserve(nodes_.size());
    for (auto& p : nodes_) out_.nodes.push_back(std::shared_ptr<const AsyncNode>(std::move(p)));
    return std::move(out_);
  }

  void send(Port port, const Payload& payload) {
    if (out_.scheduler_fault) return;
    const NodeIndex u = current_;
    if (port < 1 || port > n_ - 1) {
      out_.protocol_faults.push_back("node " + std::to_string(u) + " sent on invalid port " + std::to_string(port));
      return;
    }
    const Endpoint to = cfg_.mapping.resolve({u, port});
    const std::uint64_t link = static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(n_) +
                               static_cast<std::uint64_t>(to.node);
    SendInfo info{{u, port}, to, payload, now_, std::nullopt};
    // Delivery times are always positive, so 0 marks an unused link.
    if (const SimTime prev = link_last_[link]; prev > 0) info.link_last_delivery = prev;
    const SimTime at = cfg_.scheduler->delivery_time(info, *this);
    if (at <= now_ || at > now_ + kTicksPerUnit) {
      out_.scheduler_fault = "scheduler " + cfg_.scheduler->name() + " assigned delay " +
                             std::to_string(to_units(at - now_)) + " outside (0,1]";
      return;
    }
    if (info.link_last_delivery && at < *info.link_last_delivery) {
      out_.scheduler_fault = "scheduler " + cfg_.scheduler->name() + " violated FIFO on link " +
                             std::to_string(u) + "->" + std::to_string(to.node);
      return;
    }
    link_last_[link] = at;
    ++out_.messages_total;
    const std::uint64_t seq = push({at, 0, true, to.node, to.port, payload, u, now_});
    if (cfg_.trace) {
      out_.trace.push_back({now_, TraceKind::send, u, port, payload, seq, to.node, now_, Decision::undecided});
    }
  }

  SimTime now() const { return now_; }

  void attach(AsyncContext* ctx) { ctx_ = ctx; }

 private:
  std::uint64_t push(Event ev) {
    ev.seq = next_seq_++;
    std::uint32_t slot = 0;
    if (free_.empty()) {
      slot = static_cast<std::uint32_t>(pool_.size());
      pool_.push_back(ev);
    } else {
      slot = free_.back();
      free_.pop_back();
      pool_[slot] = ev;
    }
    queue_.push({ev.time, ev.seq, slot});
    return ev.seq;
  }

  void wake(NodeIndex u, WakeCause cause) {
    awake_[static_cast<std::size_t>(u)] = 1;
    out_.wake_time[static_cast<std::size_t>(u)] = now_;
    if (cfg_.trace) out_.trace.push_back({now_, TraceKind::wake, u, 0, {}, 0, -1, now_, Decision::undecided});
    guarded(u, [&] { nodes_[static_cast<std::size_t>(u)]->on_wake(*ctx_, cause); });
  }

  template <typename Fn>
  void guarded(NodeIndex u, Fn&& fn) {
    try {
      fn();
    } catch (const ProtocolFault& e) {
      out_.protocol_faults.push_back("node " + std::to_string(u) + ": " + e.what());
    }
  }

  void note_decision(NodeIndex u) {
    const Decision d = nodes_[static_cast<std::size_t>(u)]->decision();
    auto& seen = out_.decisions[static_cast<std::size_t>(u)];
    if (d != seen) {
      seen = d;
      out_.decide_time[static_cast<std::size_t>(u)] = now_;
      if (cfg_.trace) out_.trace.push_back({now_, TraceKind::decide, u, 0, {}, 0, -1, now_, d});
    }
  }

  const AsyncConfig& cfg_;
  int n_;
  std::vector<std::unique_ptr<AsyncNode>> nodes_;
  std::vector<std::uint8_t> awake_;
  std::priority_queue<EventKey, std::vector<EventKey>, KeyLater> queue_;
  std::vector<Event> pool_;
  std::vector<std::uint32_t> free_;
  std::vector<SimTime> link_last_;  // n x n, latest delivery per directed link
  std::uint64_t next_seq_ = 0;
  SimTime now_ = 0;
  NodeIndex current_ = 0;
  AsyncContext* ctx_ = nullptr;
  AsyncOutcome out_;
};

class RunnerContext final : public AsyncContext {
 public:
  explicit RunnerContext(Runner& runner) : runner_(runner) {}
  SimTime now() const override { return runner_.now(); }
  void send(Port port, const Payload& payload) override { runner_.send(port, payload); }

 private:
  Runner& runner_;
};

}  // namespace

SchedulerPtr unit_delay() { return std::make_shared<UnitDelay>(); }

SchedulerPtr uniform_random_delay(std::uint64_t seed) { return std::make_shared<UniformRandomDelay>(seed); }

SchedulerPtr adaptive(std::string name, std::function<double(const SendInfo&, const AsyncWorld&)> policy) {
  if (!policy) throw ConfigError("adaptive scheduler needs a policy");
  return std::make_shared<AdaptiveScheduler>(std::move(name), std::move(policy));
}

std::optional<double> AsyncOutcome::all_awake_by() const {
  SimTime latest = origin;
  for (const auto& t : wake_time) {
    if (!t) return std::nullopt;
    latest = std::max(latest, *t);
  }
  return to_units(latest - origin);
}

bool decided_all(const AsyncOutcome& outcome) {
  return decided_all(std::span<const Decision>(outcome.decisions));
}

AsyncOutcome run_async(const AsyncProtocol& protocol, const AsyncConfig& cfg) {
  const int n = cfg.ids.size();
  if (n < 1) throw ConfigError("run_async: empty identity assignment");
  if (cfg.mapping.node_count() != n) throw ConfigError("run_async: port mapping size differs from node count");
  if (cfg.wake_schedule.empty()) throw ConfigError("run_async: wake schedule is empty");
  for (const auto& w : cfg.wake_schedule) {
    if (w.node < 0 || w.node >= n) throw ConfigError("run_async: wake schedule node out of range");
    if (w.time < 0) throw ConfigError("run_async: negative wake time");
  }
  if (!cfg.scheduler) throw ConfigError("run_async: no scheduler");
  if (cfg.max_events < 0) throw ConfigError("run_async: max_events must be positive");

  Runner runner(protocol, cfg);
  RunnerContext ctx(runner);
  runner.attach(&ctx);
  return runner.run();
}

void write_trace_jsonl(std::ostream& os, std::span<const AsyncTraceEvent> trace) {
  for (const auto& ev : trace) {
    nlohmann::json j{{"time", to_units(ev.time)}, {"kind", to_string(ev.kind)}, {"node", ev.node}, {"port", ev.port}};
    if (ev.kind == TraceKind::send || ev.kind == TraceKind::deliver) {
      j["payload"] = digest(ev.payload);
      j["msg"] = ev.msg_id;
    }
    if (ev.kind == TraceKind::decide) j["decision"] = to_string(ev.decision);
    os << j.dump() << '\n';
  }
}

TraceAudit audit_trace(std::span<const AsyncTraceEvent> trace) {
  TraceAudit audit;
  struct Sent {
    SimTime time;
    NodeIndex from;
    NodeIndex to;
  };
  std::unordered_map<std::uint64_t, Sent> sends;
  // Per directed link: msg id of the latest delivery seen.
  std::unordered_map<std::uint64_t, std::uint64_t> last_on_link;
  for (const auto& ev : trace) {
    if (ev.kind == TraceKind::send) {
      sends[ev.msg_id] = {ev.time, ev.node, ev.peer};
    } else if (ev.kind == TraceKind::deliver) {
      ++audit.deliveries;
      auto it = sends.find(ev.msg_id);
      if (it == sends.end() || it->second.to != ev.node || it->second.from != ev.peer) {
        ++audit.unmatched;
        continue;
      }
      const SimTime delay = ev.time - it->second.time;
      if (delay <= 0 || delay > kTicksPerUnit) ++audit.delay_violations;
      const std::uint64_t link = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ev.peer)) << 32) |
                                 static_cast<std::uint32_t>(ev.node);
      // Message ids grow with send order, so FIFO means increasing ids.
      if (auto prev = last_on_link.find(link); prev != last_on_link.end() && prev->second > ev.msg_id) {
        ++audit.fifo_violations;
      }
      last_on_link[link] = ev.msg_id;
    }
  }
  return audit;
}

}  // namespace cliquelab
