#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "cliquelab/adversary.hpp"
#include "cliquelab/errors.hpp"
#include "cliquelab/protocols.hpp"

using namespace cliquelab;

namespace {

SyncConfig sync_config(IdAssignment ids, std::uint64_t seed) {
  SyncConfig cfg;
  const int n = ids.size();
  cfg.ids = std::move(ids);
  cfg.wiring = random_port_mapping(n, seed + 1);
  cfg.seed = seed;
  cfg.trace = true;
  return cfg;
}

AsyncConfig async_config(int n, std::uint64_t seed, SchedulerPtr scheduler, std::vector<SpontaneousWake> wake) {
  AsyncConfig cfg;
  cfg.ids = IdAssignment::random(n, static_cast<std::uint64_t>(n) * n, seed);
  cfg.mapping = random_port_mapping(n, seed + 1);
  cfg.wake_schedule = std::move(wake);
  cfg.scheduler = std::move(scheduler);
  cfg.seed = seed;
  cfg.trace = true;
  return cfg;
}

NodeIndex leader_of(std::span<const Decision> decisions) {
  for (std::size_t u = 0; u < decisions.size(); ++u) {
    if (decisions[u] == Decision::leader) return static_cast<NodeIndex>(u);
  }
  return -1;
}

// Smallest c with c^q >= n^p.
int exact_ceil_power(int n, int p, int q) {
  auto pw = [](std::uint64_t b, int e) {
    std::uint64_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  };
  int c = 1;
  while (pw(static_cast<std::uint64_t>(c), q) < pw(static_cast<std::uint64_t>(n), p)) ++c;
  return c;
}

// A couple of spontaneous wake-ups spread over the first unit.
std::vector<SpontaneousWake> staggered_wakes(int n, std::uint64_t seed) {
  const auto u = static_cast<NodeIndex>(seed % static_cast<std::uint64_t>(n));
  const auto v = static_cast<NodeIndex>((seed * 7 + 3) % static_cast<std::uint64_t>(n));
  return {{u, 0}, {v, from_units(0.4)}};
}

// (node, rank) of every compete sender in an async trace.
std::set<std::pair<NodeIndex, std::uint64_t>> ranks(const AsyncOutcome& out) {
  std::set<std::pair<NodeIndex, std::uint64_t>> got;
  for (const auto& e : out.trace) {
    if (e.kind == TraceKind::send && e.payload.kind == MsgKind::compete) got.insert({e.node, e.payload.value});
  }
  return got;
}

}  // namespace

TEST_CASE("improved_ag: two nodes elect the larger id") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto out = run_sync(*improved_afek_gafni(3), sync_config(IdAssignment({{5}, {9}}, 9), seed));
    CHECK(out.decisions == std::vector<Decision>{Decision::non_leader, Decision::leader});
    CHECK(out.rounds_used == 3);
  }
}

TEST_CASE("improved_ag fanouts are exact ceilings capped by unused ports") {
  for (int n = 2; n <= 64; ++n) {
    for (int ell : {3, 5, 7}) {
      const int k = (ell + 3) / 2;
      const auto f = improved_ag_fanouts(n, ell);
      REQUIRE(static_cast<int>(f.size()) == k - 2);
      int used = 0;
      for (int i = 1; i <= k - 2; ++i) {
        const int expect = std::min(exact_ceil_power(n, i, k - 1), n - 1 - used);
        CHECK(f[static_cast<std::size_t>(i - 1)] == expect);
        used += expect;
      }
    }
  }
}

TEST_CASE("improved_ag: n=16, ell=3 stays within 140 messages") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto cfg = sync_config(IdAssignment::random(16, 256, seed), seed);
    const auto out = run_sync(*improved_afek_gafni(3), cfg);
    CHECK(leader_of(out.decisions) == cfg.ids.argmax());
    CHECK(out.rounds_used == 3);
    CHECK(out.messages_total <= 140);
  }
}

TEST_CASE("improved_ag elects the maximum id in exactly ell rounds") {
  for (int n = 2; n <= 64; n += 5) {
    for (int ell : {3, 5, 7}) {
      for (std::uint64_t seed = 0; seed < 100; seed += 4) {
        auto cfg = sync_config(IdAssignment::random(n, static_cast<std::uint64_t>(n) * n, seed), seed);
        cfg.trace = false;
        const auto out = run_sync(*improved_afek_gafni(ell), cfg);
        REQUIRE(leader_count(out) == 1);
        CHECK(leader_of(out.decisions) == cfg.ids.argmax());
        CHECK(out.rounds_used == ell);
        CHECK(decided_all(out));
      }
    }
  }
  const double n = 64.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto out = run_sync(*improved_afek_gafni(5), sync_config(IdAssignment::random(64, 4096, seed), seed));
    CHECK(static_cast<double>(out.messages_total) <= 8.0 * 5 * std::pow(n, 1.0 + 2.0 / 6.0));
  }
}

TEST_CASE("small_id examples") {
  auto out = run_sync(*small_id_broadcast(1, 1), sync_config(IdAssignment({{1}, {2}, {3}, {4}}, 4), 3));
  CHECK(leader_of(out.decisions) == 0);
  CHECK(out.rounds_used == 1);
  CHECK(out.messages_total == 3);

  out = run_sync(*small_id_broadcast(2, 2), sync_config(IdAssignment({{7}, {5}, {8}, {6}}, 8), 3));
  CHECK(leader_of(out.decisions) == 1);
  CHECK(out.rounds_used == 2);
  CHECK(out.messages_total == 12);

  for (int n : {3, 9, 20}) {
    out = run_sync(*small_id_broadcast(n, 1), sync_config(IdAssignment::random(n, n, 4), 4));
    CHECK(out.rounds_used == 1);
    CHECK(out.messages_total <= n * (n - 1));
  }
}

TEST_CASE("small_id elects the minimum id within its block bound") {
  const int n = 8;
  for (int d : {1, 2, 4}) {
    for (int g : {1, 2}) {
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto cfg = sync_config(IdAssignment::random(n, static_cast<std::uint64_t>(n * g), seed), seed);
        const auto out = run_sync(*small_id_broadcast(d, g), cfg);
        const std::uint64_t min_id = cfg.ids[cfg.ids.argmin()].value;
        const auto block = static_cast<std::uint64_t>(d * g);
        CHECK(leader_of(out.decisions) == cfg.ids.argmin());
        CHECK(leader_count(out) == 1);
        CHECK(out.rounds_used == static_cast<int>((min_id + block - 1) / block));
        CHECK(out.messages_total <= d * g * (n - 1));
      }
    }
  }
}

TEST_CASE("small_id rejects ids outside its universe") {
  CHECK_THROWS_AS(run_sync(*small_id_broadcast(1, 1), sync_config(IdAssignment({{1}, {9}}, 9), 1)), ConfigError);
  CHECK_THROWS_AS(small_id_broadcast(0, 1), ConfigError);
  CHECK_THROWS_AS(small_id_broadcast(1, 0), ConfigError);
}

TEST_CASE("las_vegas: an attempt without candidates restarts everyone") {
  auto cfg = sync_config(IdAssignment::random(32, 1024, 1), 1);
  cfg.max_rounds = 6;
  const auto out = run_sync(*las_vegas_three_round(1e-9, 4.0), cfg);
  CHECK(out.messages_total == 0);
  CHECK(leader_count(out) == 0);
  CHECK(out.rounds_used == 6);
  CHECK_FALSE(out.finished);
}

TEST_CASE("las_vegas: a lone candidate costs two referee rounds and an announcement") {
  const int n = 64;
  const int referees = las_vegas_referee_count(n, 4.0);
  CHECK(referees == std::min(n - 1, static_cast<int>(std::ceil(4.0 * std::sqrt(n * std::log(n))))));
  int found = 0;
  for (std::uint64_t seed = 0; seed < 400 && found < 5; ++seed) {
    // Expect about one candidate per attempt.
    const auto out = run_sync(*las_vegas_three_round(1.0 / std::log(n), 4.0),
                              sync_config(IdAssignment::random(n, 4096, seed), seed));
    std::set<NodeIndex> competitors;
    for (const auto& e : out.trace) {
      if (e.round == 1 && e.kind == TraceKind::send) competitors.insert(e.node);
    }
    if (competitors.size() != 1 || out.rounds_used != 3) continue;
    ++found;
    CHECK(leader_of(out.decisions) == *competitors.begin());
    CHECK(out.messages_total == 2 * referees + (n - 1));
  }
  CHECK(found == 5);
}

TEST_CASE("las_vegas: unique leader and unanimous restarts") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const int n = 8 + static_cast<int>(seed % 60);
    const auto out = run_sync(*las_vegas_three_round(seed % 3 == 0 ? 0.5 : 4.0, 4.0),
                              sync_config(IdAssignment::random(n, static_cast<std::uint64_t>(n) * n, seed), seed));
    REQUIRE(out.finished);
    CHECK(leader_count(out) == 1);
    CHECK(decided_all(out));
    CHECK(out.rounds_used % 3 == 0);
    for (const auto& e : out.trace) {
      if (e.kind == TraceKind::decide) CHECK(e.round == out.rounds_used);
    }
  }
}

TEST_CASE("two_round: the woken node never competes without a message") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto cfg = sync_config(IdAssignment::random(49, 2401, seed), seed);
    cfg.wake = SyncWake::adversarial({3});
    const auto out = run_sync(*two_round_adversarial(0.01), cfg);
    int first_round = 0;
    for (const auto& e : out.trace) {
      if (e.kind != TraceKind::send) continue;
      if (e.round == 1) ++first_round;
      if (e.round == 2) CHECK(e.node != 3);
    }
    CHECK(first_round == 7);
    CHECK(out.decisions[3] != Decision::leader);
  }
}

TEST_CASE("two_round: at most one leader, a lone candidate wins") {
  int lone = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const int n = 4 + static_cast<int>(seed % 100);
    auto cfg = sync_config(IdAssignment::random(n, static_cast<std::uint64_t>(n) * n, seed), seed);
    cfg.wake = SyncWake::adversarial(random_half(n, seed));
    const auto out = run_sync(*two_round_adversarial(seed % 2 == 0 ? 0.1 : 0.6), cfg);
    CHECK(leader_count(out) <= 1);
    CHECK(out.rounds_used <= 2);
    std::set<NodeIndex> candidates;
    for (const auto& e : out.trace) {
      if (e.round == 2 && e.kind == TraceKind::send) candidates.insert(e.node);
    }
    if (candidates.size() == 1) {
      ++lone;
      CHECK(leader_of(out.decisions) == *candidates.begin());
    }
  }
  CHECK(lone > 0);
  CHECK_THROWS_AS(two_round_adversarial(0.0), ConfigError);
  CHECK_THROWS_AS(two_round_adversarial(1.0), ConfigError);
}

TEST_CASE("async_tradeoff: highest-ranked of three candidates wins, a lower one is killed") {
  int scripted = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto out = run_async(*async_tradeoff(2), async_config(3, seed, unit_delay(), {{0, 0}}));
    const auto drawn = ranks(out);
    REQUIRE(drawn.size() == 3);  // every node is a candidate at n=3
    std::set<std::uint64_t> distinct;
    for (const auto& r : drawn) distinct.insert(r.second);
    if (distinct.size() < 3) continue;  // ranks come from [1, 81]; a tied top rank loses everywhere
    ++scripted;
    auto best = *drawn.begin();
    auto worst = *drawn.begin();
    for (const auto& r : drawn) {
      if (r.second > best.second) best = r;
      if (r.second < worst.second) worst = r;
    }
    CHECK(out.leader_count == 1);
    CHECK(out.decisions[static_cast<std::size_t>(best.first)] == Decision::leader);
    CHECK(out.decisions[static_cast<std::size_t>(worst.first)] == Decision::non_leader);
    CHECK(decided_all(out));
  }
  CHECK(scripted >= 20);
}

TEST_CASE("async_tradeoff trace predicates") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const int n = 32 + static_cast<int>(seed % 5) * 40;
    const SchedulerPtr scheduler = seed % 3 == 0 ? slow_competes() : seed % 3 == 1 ? fifo_stress(seed)
                                                                                    : uniform_random_delay(seed);
    const auto out = run_async(*async_tradeoff(2 + static_cast<int>(seed % 2)),
                               async_config(n, seed, scheduler, staggered_wakes(n, seed)));
    std::map<std::pair<NodeIndex, NodeIndex>, int> competes;
    std::map<std::pair<NodeIndex, NodeIndex>, int> wins;
    std::set<NodeIndex> lost;
    for (const auto& e : out.trace) {
      if (e.kind == TraceKind::deliver && e.payload.kind == MsgKind::compete) ++competes[{e.node, e.peer}];
      if (e.kind == TraceKind::send && e.payload.kind == MsgKind::win) ++wins[{e.node, e.peer}];
      if (e.kind == TraceKind::deliver && e.payload.kind == MsgKind::lose) lost.insert(e.node);
    }
    for (const auto& [link, count] : wins) CHECK(count <= competes[link]);
    for (NodeIndex u : lost) CHECK(out.decisions[static_cast<std::size_t>(u)] != Decision::leader);
    CHECK(out.leader_count <= 1);
  }
}

TEST_CASE("async_tradeoff: one wake-up reaches everyone within k+4 under unit delay") {
  for (int n : {256, 1024}) {
    for (int k : {2, 3}) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto cfg = async_config(n, seed, unit_delay(), {{static_cast<NodeIndex>(seed), 0}});
        cfg.trace = false;
        const auto out = run_async(*async_tradeoff(k), cfg);
        const auto awake = out.all_awake_by();
        REQUIRE(awake.has_value());
        CHECK(*awake <= k + 4);
      }
    }
  }
}

TEST_CASE("drawn ranks do not depend on the scheduler") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int n = 100;
    const auto wake = staggered_wakes(n, seed);
    const auto a = run_async(*async_tradeoff(2), async_config(n, seed, unit_delay(), wake));
    const auto b = run_async(*async_tradeoff(2), async_config(n, seed, uniform_random_delay(seed + 50), wake));
    const auto c = run_async(*async_tradeoff(2), async_config(n, seed, slow_competes(), wake));
    REQUIRE(a.all_awake_by().has_value());
    REQUIRE(b.all_awake_by().has_value());
    REQUIRE(c.all_awake_by().has_value());
    CHECK(ranks(a) == ranks(b));
    CHECK(ranks(a) == ranks(c));
  }
}

TEST_CASE("async_tradeoff parameter checks") {
  CHECK_THROWS_AS(async_tradeoff(1), ConfigError);
  CHECK_THROWS_AS(async_tradeoff(2, 0.0), ConfigError);
  CHECK(async_tradeoff_max_k(2) == 2);
  CHECK(async_tradeoff_max_k(256) == 3);  // floor(8 / 3) + 1
  CHECK(async_tradeoff_max_k(65536) == 5);
  auto cfg = async_config(16, 1, unit_delay(), {{0, 0}});
  CHECK_THROWS_AS(run_async(*async_tradeoff(9), cfg), ConfigError);
  CHECK(async_wake_fanout(256, 2, 4.0) == 64);
  CHECK(async_wake_fanout(10, 2, 4.0) == 9);
  CHECK(async_referee_count(256) == static_cast<int>(std::ceil(4.0 * std::sqrt(256 * std::log(256.0)))));
}

TEST_CASE("async_levels: ids 3 and 7") {
  const auto out = run_async(*async_levels(), [] {
    AsyncConfig cfg;
    cfg.ids = IdAssignment({{3}, {7}}, 7);
    cfg.mapping = random_port_mapping(2, 0);
    cfg.wake_schedule = {{0, 0}, {1, 0}};
    cfg.scheduler = unit_delay();
    return cfg;
  }());
  CHECK(out.decisions == std::vector<Decision>{Decision::non_leader, Decision::leader});
}

TEST_CASE("async_levels: a lone node is leader at level 0") {
  AsyncConfig cfg;
  cfg.ids = IdAssignment::sequential(1);
  cfg.mapping = random_port_mapping(1, 0);
  cfg.wake_schedule = {{0, 0}};
  cfg.scheduler = unit_delay();
  const auto out = run_async(*async_levels(), cfg);
  CHECK(out.leader_count == 1);
  CHECK(out.messages_total == 0);
  CHECK(levels_completed(*out.nodes[0]) == 0);
}

TEST_CASE("async_levels: one leader and at most n/2^i candidates per level under every scheduler") {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const int n = 2 + static_cast<int>(seed % 40);
    const std::vector<SchedulerPtr> schedulers{unit_delay(), uniform_random_delay(seed), fifo_stress(seed),
                                               fast_wakeups_slow_elections()};
    for (const auto& scheduler : schedulers) {
      auto cfg = async_config(n, seed, scheduler, WakeStrategy::all().to_async(n));
      cfg.trace = false;
      const auto out = run_async(*async_levels(), cfg);
      REQUIRE(out.protocol_faults.empty());
      CHECK(out.leader_count == 1);
      CHECK(decided_all(out));
      std::vector<int> reached(40, 0);
      for (const auto& node : out.nodes) {
        for (int i = 0; i <= levels_completed(*node).value_or(-1); ++i) ++reached[static_cast<std::size_t>(i)];
      }
      // A level-i candidate holds min(2^i, n) supporters; the top level of a
      // non-power-of-two n is capped at n.
      for (int i = 0; i < 40; ++i) {
        const std::int64_t reach = std::min<std::int64_t>(std::int64_t{1} << i, n);
        CHECK(reached[static_cast<std::size_t>(i)] * reach <= n);
      }
    }
  }
}

TEST_CASE("async_levels tolerates staggered wake-ups") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 3 + static_cast<int>(seed % 30);
    auto cfg = async_config(n, seed, uniform_random_delay(seed), staggered_wakes(n, seed));
    cfg.time_accounting = TimeAccounting::from_last_spontaneous_wake;
    cfg.trace = false;
    const auto out = run_async(*async_levels(), cfg);
    CHECK(out.leader_count == 1);
    CHECK(decided_all(out));
  }
}
