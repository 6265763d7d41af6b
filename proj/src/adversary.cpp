#include "cliquelab/adversary.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <ostream>

#include "cliquelab/errors.hpp"
#include "cliquelab/rng.hpp"

namespace cliquelab {

namespace {

void check_nodes(std::span<const NodeIndex> nodes, int n) {
  if (nodes.empty()) throw ConfigError("wake strategy: empty wake set");
  for (NodeIndex u : nodes) {
    if (u < 0 || u >= n) throw ConfigError("wake strategy: node " + std::to_string(u) + " out of range");
  }
}

}  // namespace

SyncWake WakeStrategy::to_sync(int n) const {
  switch (mode) {
    case Mode::all_at_round_1:
      return SyncWake::all();
    case Mode::single:
    case Mode::subset:
      check_nodes(nodes, n);
      return SyncWake::adversarial(nodes);
    case Mode::async_schedule:
      break;
  }
  throw ConfigError("wake strategy: timed schedules need the asynchronous engine");
}

std::vector<SpontaneousWake> WakeStrategy::to_async(int n) const {
  std::vector<SpontaneousWake> out;
  switch (mode) {
    case Mode::all_at_round_1:
      for (NodeIndex u = 0; u < n; ++u) out.push_back({u, 0});
      break;
    case Mode::single:
    case Mode::subset:
      check_nodes(nodes, n);
      for (NodeIndex u : nodes) out.push_back({u, 0});
      break;
    case Mode::async_schedule:
      if (schedule.empty()) throw ConfigError("wake strategy: empty wake schedule");
      out = schedule;
      break;
  }
  return out;
}

std::vector<NodeIndex> random_half(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<NodeIndex> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::vector<NodeIndex> out;
  std::ranges::sample(all, std::back_inserter(out), std::max(1, n / 2), rng);
  return out;
}

IsolatingPortAdversary::IsolatingPortAdversary(int n)
    : n_(n), partial_(n), parent_(static_cast<std::size_t>(n)), size_(static_cast<std::size_t>(n), 1) {
  std::iota(parent_.begin(), parent_.end(), 0);
  snapshot(CommGraph(n));
}

NodeIndex IsolatingPortAdversary::find(NodeIndex u) const {
  while (parent_[static_cast<std::size_t>(u)] != u) {
    auto& p = parent_[static_cast<std::size_t>(u)];
    p = parent_[static_cast<std::size_t>(p)];
    u = p;
  }
  return u;
}

void IsolatingPortAdversary::unite(NodeIndex a, NodeIndex b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (size_[static_cast<std::size_t>(a)] < size_[static_cast<std::size_t>(b)]) std::swap(a, b);
  parent_[static_cast<std::size_t>(b)] = a;
  size_[static_cast<std::size_t>(a)] += size_[static_cast<std::size_t>(b)];
}

std::vector<std::vector<NodeIndex>> IsolatingPortAdversary::components() const {
  std::vector<int> index(static_cast<std::size_t>(n_), -1);
  std::vector<std::vector<NodeIndex>> out;
  for (NodeIndex u = 0; u < n_; ++u) {
    auto& slot = index[static_cast<std::size_t>(find(u))];
    if (slot < 0) {
      slot = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[static_cast<std::size_t>(slot)].push_back(u);
  }
  return out;
}

void IsolatingPortAdversary::snapshot(const CommGraph& graph) {
  start_members_ = components();
  start_comp_.assign(static_cast<std::size_t>(n_), 0);
  start_capacity_.clear();
  for (std::size_t c = 0; c < start_members_.size(); ++c) {
    for (NodeIndex u : start_members_[c]) start_comp_[static_cast<std::size_t>(u)] = static_cast<int>(c);
    start_capacity_.push_back(capacity(graph, start_members_[c]));
  }
  spare_ = start_capacity_;
  opened_.assign(start_members_.size(), 0);
}

void IsolatingPortAdversary::on_round_begin(int, std::span<const Endpoint> planned) {
  std::ranges::fill(opened_, 0);
  planned_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(std::max(n_ - 1, 0)), 0);
  for (const Endpoint& e : planned) {
    auto& mark = planned_[static_cast<std::size_t>(e.node) * static_cast<std::size_t>(n_ - 1) +
                          static_cast<std::size_t>(e.port - 1)];
    if (mark != 0 || partial_.is_assigned(e)) continue;
    mark = 1;
    ++opened_[static_cast<std::size_t>(start_comp_[static_cast<std::size_t>(e.node)])];
  }
}

bool IsolatingPortAdversary::is_planned(Endpoint e) const {
  if (planned_.empty()) return false;
  return planned_[static_cast<std::size_t>(e.node) * static_cast<std::size_t>(n_ - 1) +
                  static_cast<std::size_t>(e.port - 1)] != 0;
}

Port IsolatingPortAdversary::target_port(NodeIndex v) const {
  // A port v is about to open anyway carries v's message back over the same
  // link instead of opening a second one.
  for (Port q = 1; q < n_; ++q) {
    if (!partial_.is_assigned({v, q}) && is_planned({v, q})) return q;
  }
  const auto q = partial_.lowest_free_port(v);
  if (!q) throw AssignmentError("isolating adversary: node " + std::to_string(v) + " has no free port");
  return *q;
}

std::optional<NodeIndex> IsolatingPortAdversary::pick_inside(NodeIndex u) const {
  const auto c = static_cast<std::size_t>(start_comp_[static_cast<std::size_t>(u)]);
  if (spare_[c] < 1) return std::nullopt;
  for (NodeIndex v : start_members_[c]) {
    if (v != u && !partial_.connected(u, v)) return v;
  }
  return std::nullopt;
}

NodeIndex IsolatingPortAdversary::pick_outside(NodeIndex u) const {
  const NodeIndex own = find(u);
  NodeIndex best_root = -1;
  NodeIndex best_member = -1;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(n_), 0);
  for (NodeIndex v = 0; v < n_; ++v) {
    const NodeIndex root = find(v);
    if (root == own || seen[static_cast<std::size_t>(root)] != 0) continue;
    seen[static_cast<std::size_t>(root)] = 1;  // v is the smallest member of root
    if (best_root < 0 || size_[static_cast<std::size_t>(root)] < size_[static_cast<std::size_t>(best_root)]) {
      best_root = root;
      best_member = v;
    }
  }
  if (best_member >= 0) return best_member;
  for (NodeIndex v = 0; v < n_; ++v) {
    if (v != u && !partial_.connected(u, v)) return v;
  }
  throw AssignmentError("isolating adversary: node " + std::to_string(u) + " is connected to everyone");
}

Endpoint IsolatingPortAdversary::route(Endpoint from) {
  if (auto to = partial_.resolve(from)) return *to;
  const auto c = static_cast<std::size_t>(start_comp_[static_cast<std::size_t>(from.node)]);
  NodeIndex v = -1;
  if (auto inside = pick_inside(from.node)) {
    v = *inside;
    --spare_[c];
  } else {
    v = pick_outside(from.node);
  }
  const Endpoint to{v, target_port(v)};
  partial_.assign(from, to);
  unite(from.node, v);
  return to;
}

void IsolatingPortAdversary::on_round_end(int round, const CommGraph& graph, std::int64_t messages_so_far) {
  std::vector<std::uint8_t> inside(static_cast<std::size_t>(n_), 0);
  for (std::size_t c = 0; c < start_members_.size(); ++c) {
    if (opened_[c] > start_capacity_[c]) continue;
    ++checks_;
    if (opened_[c] > 0) ++nontrivial_checks_;
    const auto& members = start_members_[c];
    for (NodeIndex u : members) inside[static_cast<std::size_t>(u)] = 1;
    bool leaked = false;
    for (NodeIndex u : members) {
      for (NodeIndex v = 0; v < n_ && !leaked; ++v) {
        if (inside[static_cast<std::size_t>(v)] == 0 && graph.has_edge(u, v)) leaked = true;
      }
    }
    if (leaked) ++violations_;
    for (NodeIndex u : members) inside[static_cast<std::size_t>(u)] = 0;
  }

  snapshot(graph);
  planned_.clear();
  int largest = 0;
  for (const auto& c : start_members_) largest = std::max(largest, static_cast<int>(c.size()));
  growth_.push_back({round, static_cast<int>(start_members_.size()), largest, messages_so_far});
}

void write_growth_csv(std::ostream& os, std::span<const GrowthRow> rows) {
  os << "round,component_count,max_component_size,messages_so_far\n";
  for (const auto& r : rows) {
    os << r.round << ',' << r.component_count << ',' << r.max_component_size << ',' << r.messages_so_far << '\n';
  }
}

SchedulerPtr slow_competes() {
  return adaptive("slow-competes", [](const SendInfo& msg, const AsyncWorld&) {
    const bool slow = msg.payload.kind == MsgKind::compete || msg.payload.kind == MsgKind::consult;
    return slow ? 1.0 : 0.01;
  });
}

SchedulerPtr fast_wakeups_slow_elections() {
  return adaptive("fast-wakeups", [](const SendInfo& msg, const AsyncWorld&) {
    return msg.payload.kind == MsgKind::wake ? 0.01 : 1.0;
  });
}

SchedulerPtr fifo_stress(std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return adaptive("fifo-stress", [rng, seed](const SendInfo& msg, const AsyncWorld& world) {
    const auto link = static_cast<std::uint64_t>(msg.from.node) * static_cast<std::uint64_t>(world.node_count()) +
                      static_cast<std::uint64_t>(msg.to.node);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double x = unit(*rng);
    double delay = 0.0;
    switch (splitmix64(seed ^ splitmix64(link)) % 4) {
      case 0:  // always slow
        delay = 0.9 + 0.1 * x;
        break;
      case 1:  // always fast
        delay = 0.001 + 0.01 * x;
        break;
      case 2:  // bursty: mostly fast with rare maximal stalls
        delay = x < 0.1 ? 1.0 : 0.005;
        break;
      default:
        delay = x;
        break;
    }
    // Stay strictly inside (0,1].
    return std::clamp(delay, 1e-6, 1.0);
  });
}

}  // namespace cliquelab
