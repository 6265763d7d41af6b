#include "cliquelab/sync_engine.hpp"

#include <algorithm>
#include <ostream>

#include <json.hpp>

#include "cliquelab/errors.hpp"
#include "cliquelab/rng.hpp"

namespace cliquelab {

int leader_count(const SyncOutcome& outcome) { return leader_count(std::span<const Decision>(outcome.decisions)); }
bool decided_all(const SyncOutcome& outcome) { return decided_all(std::span<const Decision>(outcome.decisions)); }

namespace {

class FixedWiring final : public PortWiring {
 public:
  explicit FixedWiring(const PortMapping& pm) : pm_(pm) {}
  Endpoint route(Endpoint from) override { return pm_.resolve(from); }

 private:
  const PortMapping& pm_;
};

}  // namespace

SyncOutcome run_sync(const SyncProtocol& protocol, const SyncConfig& cfg) {
  const int n = cfg.ids.size();
  if (n < 1) throw ConfigError("run_sync: empty identity assignment");
  if (cfg.max_rounds < 0) throw ConfigError("run_sync: max_rounds must be positive");
  const int max_rounds = cfg.max_rounds > 0 ? cfg.max_rounds : 4 * n;

  std::unique_ptr<FixedWiring> fixed;
  PortWiring* wiring = nullptr;
  if (const auto* pm = std::get_if<PortMapping>(&cfg.wiring)) {
    if (pm->node_count() != n) throw ConfigError("run_sync: port mapping size differs from node count");
    fixed = std::make_unique<FixedWiring>(*pm);
    wiring = fixed.get();
  } else {
    wiring = std::get<std::shared_ptr<PortWiring>>(cfg.wiring).get();
    if (wiring == nullptr) throw ConfigError("run_sync: null wiring strategy");
  }
  if (!cfg.wake.simultaneous) {
    if (cfg.wake.nodes.empty()) throw ConfigError("run_sync: adversarial wake set is empty");
    for (NodeIndex u : cfg.wake.nodes) {
      if (u < 0 || u >= n) throw ConfigError("run_sync: wake set node out of range");
    }
  }

  const auto un = static_cast<std::size_t>(n);
  std::vector<std::unique_ptr<SyncNode>> nodes;
  nodes.reserve(un);
  for (NodeIndex u = 0; u < n; ++u) {
    nodes.push_back(protocol.make_node(
        NodeContext{cfg.ids[u], n, derive_seed(cfg.seed, Stream::node_tape, static_cast<std::uint64_t>(u))}));
  }

  SyncOutcome out;
  out.decisions.assign(un, Decision::undecided);
  out.wake_round.assign(un, 0);
  out.comm_graph = CommGraph(n);

  std::vector<std::uint8_t> awake(un, 0);
  std::vector<std::uint8_t> faulted(un, 0);
  auto stopped = [&](NodeIndex u) {
    return faulted[static_cast<std::size_t>(u)] != 0 || nodes[static_cast<std::size_t>(u)]->halted();
  };
  auto guarded = [&](int round, NodeIndex u, auto&& fn) {
    try {
      fn();
    } catch (const ProtocolFault& e) {
      out.faults.push_back({round, u, e.what()});
      faulted[static_cast<std::size_t>(u)] = 1;
    }
  };
  auto wake = [&](int round, NodeIndex u, WakeCause cause) {
    awake[static_cast<std::size_t>(u)] = 1;
    out.wake_round[static_cast<std::size_t>(u)] = round;
    if (cfg.trace) out.trace.push_back({round, TraceKind::wake, u, 0, {}, Decision::undecided});
    guarded(round, u, [&] { nodes[static_cast<std::size_t>(u)]->on_wake(round, cause); });
  };

  std::vector<std::vector<PortMessage>> inbox(un);
  bool all_stopped = false;
  for (int r = 1; r <= max_rounds; ++r) {
    if (r == 1) {
      if (cfg.wake.simultaneous) {
        for (NodeIndex u = 0; u < n; ++u) wake(1, u, WakeCause::adversary);
      } else {
        for (NodeIndex u : cfg.wake.nodes) {
          if (awake[static_cast<std::size_t>(u)] == 0) wake(1, u, WakeCause::adversary);
        }
      }
    }

    // Outboxes are fixed before any port is routed, so the wiring sees the
    // whole round's openings at once.
    std::vector<std::vector<PortMessage>> outboxes(un);
    std::vector<Endpoint> planned;
    for (NodeIndex u = 0; u < n; ++u) {
      if (awake[static_cast<std::size_t>(u)] == 0 || stopped(u)) continue;
      auto& outbox = outboxes[static_cast<std::size_t>(u)];
      guarded(r, u, [&] { outbox = nodes[static_cast<std::size_t>(u)]->on_send(r); });
      if (faulted[static_cast<std::size_t>(u)] != 0) {
        outbox.clear();
        continue;
      }
      std::erase_if(outbox, [&](const PortMessage& msg) {
        if (msg.port >= 1 && msg.port <= n - 1) return false;
        out.faults.push_back({r, u, "send on invalid port " + std::to_string(msg.port)});
        return true;
      });
      for (const auto& msg : outbox) planned.push_back({u, msg.port});
    }
    wiring->on_round_begin(r, planned);

    std::int64_t sent = 0;
    for (NodeIndex u = 0; u < n; ++u) {
      for (const auto& msg : outboxes[static_cast<std::size_t>(u)]) {
        const Endpoint to = wiring->route({u, msg.port});
        ++sent;
        inbox[static_cast<std::size_t>(to.node)].push_back({to.port, msg.payload});
        out.comm_graph.record_send(u, to.node);
        if (cfg.trace) {
          out.trace.push_back({r, TraceKind::send, u, msg.port, msg.payload, Decision::undecided});
          out.trace.push_back({r, TraceKind::deliver, to.node, to.port, msg.payload, Decision::undecided});
        }
      }
    }
    out.messages_total += sent;
    out.per_round_messages.push_back(sent);

    for (NodeIndex v = 0; v < n; ++v) {
      auto& box = inbox[static_cast<std::size_t>(v)];
      if (awake[static_cast<std::size_t>(v)] == 0 && !box.empty()) wake(r, v, WakeCause::message);
      if (awake[static_cast<std::size_t>(v)] != 0 && !stopped(v)) {
        std::stable_sort(box.begin(), box.end(),
                         [](const PortMessage& a, const PortMessage& b) { return a.port < b.port; });
        guarded(r, v, [&] { nodes[static_cast<std::size_t>(v)]->on_receive(r, box); });
      }
      box.clear();
    }

    for (NodeIndex u = 0; u < n; ++u) {
      const Decision d = nodes[static_cast<std::size_t>(u)]->decision();
      if (d != out.decisions[static_cast<std::size_t>(u)]) {
        out.decisions[static_cast<std::size_t>(u)] = d;
        if (cfg.trace) out.trace.push_back({r, TraceKind::decide, u, 0, {}, d});
      }
    }
    wiring->on_round_end(r, out.comm_graph, out.messages_total);
    out.rounds_used = r;

    all_stopped = true;
    for (NodeIndex u = 0; u < n; ++u) {
      if (awake[static_cast<std::size_t>(u)] != 0 && !stopped(u)) {
        all_stopped = false;
        break;
      }
    }
    if (all_stopped) break;
  }
  out.finished = all_stopped || decided_all(out);
  return out;
}

namespace {

class SingleSendNode final : public SyncNode {
 public:
  SingleSendNode(std::unique_ptr<SyncNode> inner, int n) : inner_(std::move(inner)), n_(n) {}

  void on_wake(int round, WakeCause cause) override {
    inner_->on_wake(block_of(round), cause);
    mirror(*inner_);
  }

  std::vector<PortMessage> on_send(int round) override {
    const int offset = offset_of(round);
    if (offset == 1) {
      pending_ = inner_->on_send(block_of(round));
      mirror(*inner_);
      if (static_cast<int>(pending_.size()) > n_ - 1) {
        const auto count = pending_.size();
        pending_.clear();
        throw ProtocolFault("single-send: inner outbox of " + std::to_string(count) +
                            " messages exceeds n-1");
      }
    }
    if (offset <= static_cast<int>(pending_.size())) {
      return {pending_[static_cast<std::size_t>(offset - 1)]};
    }
    return {};
  }

  void on_receive(int round, std::span<const PortMessage> inbox) override {
    buffer_.insert(buffer_.end(), inbox.begin(), inbox.end());
    if (offset_of(round) == n_) {
      std::stable_sort(buffer_.begin(), buffer_.end(),
                       [](const PortMessage& a, const PortMessage& b) { return a.port < b.port; });
      inner_->on_receive(block_of(round), buffer_);
      buffer_.clear();
      pending_.clear();
      mirror(*inner_);
    }
  }

 private:
  int block_of(int round) const { return (round - 1) / n_ + 1; }
  int offset_of(int round) const { return (round - 1) % n_ + 1; }

  std::unique_ptr<SyncNode> inner_;
  int n_;
  std::vector<PortMessage> pending_;
  std::vector<PortMessage> buffer_;
};

class SingleSendProtocol final : public SyncProtocol {
 public:
  explicit SingleSendProtocol(SyncProtocolPtr inner) : inner_(std::move(inner)) {}

  std::string name() const override { return "single_send(" + inner_->name() + ")"; }

  std::unique_ptr<SyncNode> make_node(const NodeContext& ctx) const override {
    return std::make_unique<SingleSendNode>(inner_->make_node(ctx), ctx.n);
  }

 private:
  SyncProtocolPtr inner_;
};

}  // namespace

SyncProtocolPtr single_send_transform(SyncProtocolPtr inner) {
  if (!inner) throw ConfigError("single_send_transform: null protocol");
  return std::make_shared<SingleSendProtocol>(std::move(inner));
}

void write_trace_jsonl(std::ostream& os, std::span<const SyncTraceEvent> trace) {
  for (const auto& ev : trace) {
    nlohmann::json j{{"round", ev.round}, {"kind", to_string(ev.kind)}, {"node", ev.node}, {"port", ev.port}};
    if (ev.kind == TraceKind::send || ev.kind == TraceKind::deliver) j["payload"] = digest(ev.payload);
    if (ev.kind == TraceKind::decide) j["decision"] = to_string(ev.decision);
    os << j.dump() << '\n';
  }
}

}  // namespace cliquelab
