#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "cliquelab/adversary.hpp"
#include "cliquelab/errors.hpp"
#include "cliquelab/protocols.hpp"

using namespace cliquelab;

namespace {

// Script: id -> (round -> port). The node with that id sends one message
// on the given port in that round. Nobody ever decides.
using Script = std::map<std::uint64_t, std::map<int, Port>>;

class ScriptedNode final : public SyncNode {
 public:
  explicit ScriptedNode(std::map<int, Port> sends) : sends_(std::move(sends)) {}
  std::vector<PortMessage> on_send(int round) override {
    const auto it = sends_.find(round);
    if (it == sends_.end()) return {};
    return {{it->second, {MsgKind::request, static_cast<std::uint64_t>(round)}}};
  }
  void on_receive(int, std::span<const PortMessage>) override {}

 private:
  std::map<int, Port> sends_;
};

class ScriptedProtocol final : public SyncProtocol {
 public:
  explicit ScriptedProtocol(Script script) : script_(std::move(script)) {}
  std::string name() const override { return "scripted"; }
  std::unique_ptr<SyncNode> make_node(const NodeContext& ctx) const override {
    const auto it = script_.find(ctx.id.value);
    return std::make_unique<ScriptedNode>(it == script_.end() ? std::map<int, Port>{} : it->second);
  }

 private:
  Script script_;
};

// Forwards to the adversary and compares its component cache with the
// communication graph after every round.
class CheckedWiring final : public PortWiring {
 public:
  explicit CheckedWiring(int n) : inner_(n) {}
  void on_round_begin(int round, std::span<const Endpoint> planned) override { inner_.on_round_begin(round, planned); }
  Endpoint route(Endpoint from) override { return inner_.route(from); }
  void on_round_end(int round, const CommGraph& graph, std::int64_t messages) override {
    inner_.on_round_end(round, graph, messages);
    if (inner_.components() != weak_components(graph)) ++mismatches;
    ++rounds;
  }
  const IsolatingPortAdversary& inner() const { return inner_; }

  int mismatches = 0;
  int rounds = 0;

 private:
  IsolatingPortAdversary inner_;
};

SyncConfig adversarial(int n, std::shared_ptr<PortWiring> wiring, std::uint64_t seed = 0) {
  SyncConfig cfg;
  cfg.ids = IdAssignment::random(n, static_cast<std::uint64_t>(n) * n, seed);
  cfg.wiring = std::move(wiring);
  cfg.seed = seed;
  return cfg;
}

std::vector<std::size_t> sizes(const std::vector<std::vector<NodeIndex>>& comps) {
  std::vector<std::size_t> out;
  for (const auto& c : comps) out.push_back(c.size());
  return out;
}

}  // namespace

TEST_CASE("one message per node pairs the nodes up") {
  for (int n : {2, 6, 10, 32}) {
    Script script;
    for (int i = 1; i <= n; ++i) script[static_cast<std::uint64_t>(i)] = {{1, 1}};
    auto wiring = std::make_shared<IsolatingPortAdversary>(n);
    SyncConfig cfg = adversarial(n, wiring);
    cfg.ids = IdAssignment::sequential(n);
    cfg.max_rounds = 1;
    const auto out = run_sync(ScriptedProtocol(script), cfg);
    CHECK(out.messages_total == n);
    CHECK(sizes(weak_components(out.comm_graph)) == std::vector<std::size_t>(static_cast<std::size_t>(n / 2), 2));
    CHECK(wiring->components() == weak_components(out.comm_graph));
    REQUIRE(wiring->growth().size() == 1);
    CHECK(wiring->growth()[0].max_component_size == 2);
    CHECK(wiring->growth()[0].component_count == n / 2);
    CHECK(wiring->violations() == 0);
  }
}

TEST_CASE("a port opened within spare capacity stays inside the component") {
  // Round 1 pairs {0,1} {2,3} {4,5} {6,7}; round 2 node 1 joins {2,3},
  // giving the path 0-1-2-3 with capacity 1; round 3 node 0 opens one port.
  const Script script{{1, {{1, 1}, {3, 2}}}, {2, {{2, 2}}}, {3, {{1, 1}}}, {5, {{1, 1}}}, {7, {{1, 1}}}};
  auto wiring = std::make_shared<IsolatingPortAdversary>(8);
  SyncConfig cfg = adversarial(8, wiring);
  cfg.ids = IdAssignment::sequential(8);
  cfg.max_rounds = 3;
  const auto out = run_sync(ScriptedProtocol(script), cfg);

  const std::vector<NodeIndex> c{0, 1, 2, 3};
  CHECK(out.comm_graph.has_edge(1, 2));
  CHECK(out.comm_graph.has_edge(0, 2));
  CHECK(is_isolated(out.comm_graph, c));
  CHECK(wiring->components() == std::vector<std::vector<NodeIndex>>{{0, 1, 2, 3}, {4, 5}, {6, 7}});
  CHECK(wiring->violations() == 0);
  CHECK(wiring->nontrivial_checks() >= 1);
}

TEST_CASE("component cache agrees with weak_components every round") {
  for (int ell : {3, 5}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto wiring = std::make_shared<CheckedWiring>(16);
      const auto out = run_sync(*improved_afek_gafni(ell), adversarial(16, wiring, seed));
      CHECK(leader_count(out) == 1);
      CHECK(wiring->rounds == ell);
      CHECK(wiring->mismatches == 0);
      CHECK(wiring->inner().violations() == 0);
    }
  }
}

TEST_CASE("adversarial wiring is deterministic, completable and replays") {
  for (int n : {5, 17, 40, 64}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      auto a = std::make_shared<IsolatingPortAdversary>(n);
      auto b = std::make_shared<IsolatingPortAdversary>(n);
      const auto protocol = improved_afek_gafni(5);
      const auto run_a = run_sync(*protocol, adversarial(n, a, seed));
      const auto run_b = run_sync(*protocol, adversarial(n, b, seed));
      CHECK(run_a.decisions == run_b.decisions);
      CHECK(std::ranges::equal(run_a.comm_graph.edges(), run_b.comm_graph.edges()));

      const PortMapping full = a->complete(seed);
      CHECK(full == b->complete(seed));
      for (NodeIndex u = 0; u < n; ++u) {
        for (Port p = 1; p < n; ++p) {
          if (auto fixed = a->partial().resolve({u, p})) CHECK(full.resolve({u, p}) == *fixed);
        }
      }
      SyncConfig replay = adversarial(n, nullptr, seed);
      replay.wiring = full;
      const auto again = run_sync(*protocol, replay);
      CHECK(again.decisions == run_a.decisions);
      CHECK(again.messages_total == run_a.messages_total);
      CHECK(std::ranges::equal(again.comm_graph.edges(), run_a.comm_graph.edges()));
    }
  }
}

TEST_CASE("isolation holds for every protocol that fits its capacity") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = 8 + static_cast<int>(seed) * 3;
    for (const auto& protocol : {improved_afek_gafni(3), improved_afek_gafni(7), small_id_broadcast(2, 1),
                                 single_send_transform(improved_afek_gafni(3))}) {
      auto wiring = std::make_shared<IsolatingPortAdversary>(n);
      SyncConfig cfg = adversarial(n, wiring, seed);
      cfg.ids = IdAssignment::random(n, static_cast<std::uint64_t>(n), seed);
      const auto out = run_sync(*protocol, cfg);
      CHECK(leader_count(out) == 1);
      CHECK(wiring->violations() == 0);
    }
  }
}

TEST_CASE("growth csv") {
  std::ostringstream os;
  const std::vector<GrowthRow> rows{{1, 8, 2, 16}, {2, 3, 6, 40}};
  write_growth_csv(os, rows);
  CHECK(os.str() == "round,component_count,max_component_size,messages_so_far\n1,8,2,16\n2,3,6,40\n");
}

TEST_CASE("wake strategies") {
  CHECK(WakeStrategy::all().to_sync(4).simultaneous);
  CHECK(WakeStrategy::single(2).to_sync(4).nodes == std::vector<NodeIndex>{2});
  CHECK_THROWS_AS(WakeStrategy::single(4).to_sync(4), ConfigError);
  CHECK_THROWS_AS(WakeStrategy::subset({}).to_async(4), ConfigError);
  CHECK_THROWS_AS(WakeStrategy::timed({{0, 0}}).to_sync(4), ConfigError);
  CHECK(WakeStrategy::all().to_async(3).size() == 3);

  const auto half = random_half(9, 3);
  CHECK(half.size() == 4);
  CHECK(std::set<NodeIndex>(half.begin(), half.end()).size() == 4);
  CHECK(half == random_half(9, 3));
  CHECK(random_half(1, 3).size() == 1);
}

TEST_CASE("hostile schedulers keep async_tradeoff within k+8") {
  for (const auto& make : {+[](std::uint64_t) { return slow_competes(); },
                           +[](std::uint64_t) { return fast_wakeups_slow_elections(); },
                           +[](std::uint64_t s) { return fifo_stress(s); }}) {
    int in_time = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      AsyncConfig cfg;
      cfg.ids = IdAssignment::random(64, 4096, seed);
      cfg.mapping = random_port_mapping(64, seed + 1);
      cfg.wake_schedule = WakeStrategy::single(static_cast<NodeIndex>(seed % 64)).to_async(64);
      cfg.scheduler = make(seed);
      cfg.seed = seed;
      const auto out = run_async(*async_tradeoff(2), cfg);
      REQUIRE_FALSE(out.scheduler_fault);
      if (out.elapsed_time <= 10.0) ++in_time;
    }
    CHECK(in_time >= 39);
  }
}
