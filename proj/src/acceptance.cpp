#include "cliquelab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>

#include "cliquelab/adversary.hpp"
#include "cliquelab/errors.hpp"
#include "cliquelab/experiment.hpp"
#include "cliquelab/protocols.hpp"
#include "cliquelab/rng.hpp"

namespace cliquelab {

namespace {

// Collects the first failure of a criterion plus measured values.
class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (first_.empty()) first_ = what;
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += "; ";
    notes_ += s;
  }
  bool passed() const { return failures_ == 0; }
  std::string detail() const {
    if (passed()) return notes_;
    return "FAILED (" + std::to_string(failures_) + " checks): " + first_ + " | " + notes_;
  }

 private:
  int failures_ = 0;
  std::string first_;
  std::string notes_;
};

std::string num(double x, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

int scaled(int trials, const VerifyOptions& opts) {
  return std::max(1, static_cast<int>(std::lround(trials * opts.trial_scale)));
}

// Counter-based seeds so that criteria do not share randomness.
class Seeds {
 public:
  Seeds(std::uint64_t base, int criterion) : base_(derive_seed(base, Stream::ids, static_cast<std::uint64_t>(criterion))) {}
  std::uint64_t next() { return derive_seed(base_, Stream::completion, counter_++); }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

__extension__ using u128 = unsigned __int128;

// ceil(n^(p/q)) by integer search, independent of the protocol code.
std::uint64_t ceil_power(std::uint64_t n, int p, int q) {
  auto pow_cap = [](u128 b, int e) {
    const u128 cap = static_cast<u128>(1) << 100;
    u128 r = 1;
    for (int i = 0; i < e; ++i) {
      r *= b;
      if (r > cap) return cap;
    }
    return r;
  };
  const u128 target = pow_cap(n, p);
  std::uint64_t x = 1;
  while (pow_cap(x, q) < target) ++x;
  return x;
}

// Closed-form per-run message bound of the improved deterministic tradeoff.
std::int64_t improved_ag_bound(int n, int ell) {
  const int k = (ell + 3) / 2;
  const auto un = static_cast<std::uint64_t>(n);
  std::vector<std::uint64_t> s{un};
  std::int64_t bound = 0;
  std::uint64_t used = 0;
  for (int i = 1; i <= k - 2; ++i) {
    const std::uint64_t f = std::min(ceil_power(un, i, k - 1), un - 1 - used);
    used += f;
    s.push_back(ceil_power(un, k - 1 - i, k - 1));
    bound += static_cast<std::int64_t>(s[static_cast<std::size_t>(i - 1)] * f + un);
  }
  bound += static_cast<std::int64_t>(s.back() * (un - 1));
  return bound;
}

std::vector<std::vector<NodeIndex>> bfs_components(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<NodeIndex>> adj(static_cast<std::size_t>(n));
  for (auto [u, v] : edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<NodeIndex>> out;
  for (NodeIndex s = 0; s < n; ++s) {
    if (seen[static_cast<std::size_t>(s)] != 0) continue;
    std::vector<NodeIndex> comp;
    std::queue<NodeIndex> q;
    q.push(s);
    seen[static_cast<std::size_t>(s)] = 1;
    while (!q.empty()) {
      const NodeIndex u = q.front();
      q.pop();
      comp.push_back(u);
      for (NodeIndex v : adj[static_cast<std::size_t>(u)]) {
        if (seen[static_cast<std::size_t>(v)] == 0) {
          seen[static_cast<std::size_t>(v)] = 1;
          q.push(v);
        }
      }
    }
    std::ranges::sort(comp);
    out.push_back(std::move(comp));
  }
  return out;
}

bool components_match(int n, const std::vector<std::pair<int, int>>& edges) {
  CommGraph g(n);
  for (auto [u, v] : edges) g.record_send(u, v);
  return weak_components(g) == bfs_components(n, edges);
}

// Edges realizing exactly the given partition (block label per node): a
// random spanning tree per block with random directions, plus extra random
// edges inside blocks.
std::vector<std::pair<int, int>> realize_partition(const std::vector<int>& block, Rng& rng) {
  const int n = static_cast<int>(block.size());
  std::vector<std::vector<int>> members;
  for (int u = 0; u < n; ++u) {
    if (block[static_cast<std::size_t>(u)] >= static_cast<int>(members.size())) members.emplace_back();
    members[static_cast<std::size_t>(block[static_cast<std::size_t>(u)])].push_back(u);
  }
  std::vector<std::pair<int, int>> edges;
  auto add = [&](int a, int b) {
    if (rng() & 1U) std::swap(a, b);
    edges.emplace_back(a, b);
  };
  for (auto& m : members) {
    std::ranges::shuffle(m, rng);
    for (std::size_t i = 1; i < m.size(); ++i) {
      add(m[i], m[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)]);
    }
    const auto extra = m.size() > 2 ? rng() % m.size() : 0;
    for (std::uint64_t e = 0; e < extra; ++e) {
      const int a = m[rng() % m.size()];
      const int b = m[rng() % m.size()];
      if (a != b) add(a, b);
    }
  }
  std::ranges::shuffle(edges, rng);
  return edges;
}

std::vector<SpontaneousWake> all_at_zero(int n) {
  std::vector<SpontaneousWake> out;
  for (NodeIndex u = 0; u < n; ++u) out.push_back({u, 0});
  return out;
}

// 1. Improved deterministic tradeoff.
void criterion_improved_ag(const VerifyOptions& opts, Verdict& v) {
  Seeds seeds(opts.seed, 1);
  const int trials = scaled(200, opts);
  for (int n : {16, 64, 256}) {
    for (int ell : {3, 5, 7}) {
      const auto protocol = improved_afek_gafni(ell);
      const std::int64_t closed = improved_ag_bound(n, ell);
      const double asymptotic = 8.0 * ell * std::pow(n, 1.0 + 2.0 / (ell + 1));
      std::int64_t worst = 0;
      for (int t = 0; t < trials; ++t) {
        const std::uint64_t seed = seeds.next();
        const IdAssignment ids = IdAssignment::random(n, static_cast<std::uint64_t>(n) * n, seed);
        SyncConfig cfg{ids, random_port_mapping(n, seed + 1), SyncWake::all(), seed};
        const SyncOutcome out = run_sync(*protocol, cfg);
        const std::string at = "n=" + std::to_string(n) + " ell=" + std::to_string(ell) + " trial " + std::to_string(t);
        v.require(leader_count(out) == 1, at + ": leader count " + std::to_string(leader_count(out)));
        v.require(out.decisions[static_cast<std::size_t>(ids.argmax())] == Decision::leader, at + ": max-id node not leader");
        v.require(out.rounds_used == ell, at + ": rounds " + std::to_string(out.rounds_used));
        v.require(out.messages_total <= closed, at + ": messages " + std::to_string(out.messages_total) +
                                                    " > closed-form " + std::to_string(closed));
        v.require(static_cast<double>(out.messages_total) <= asymptotic, at + ": messages above 8 l n^(1+2/(l+1))");
        v.require(out.faults.empty(), at + ": protocol fault");
        worst = std::max(worst, out.messages_total);
      }
      if (n == 256) v.note("n=256 ell=" + std::to_string(ell) + " max " + std::to_string(worst) + " <= " + std::to_string(closed));
    }
  }
}

// 2. Small identity universes.
void criterion_small_id(const VerifyOptions& opts, Verdict& v) {
  Seeds seeds(opts.seed, 2);
  const int n = 8;
  const int trials = scaled(100, opts);
  int runs = 0;
  for (int d : {1, 2, 4}) {
    for (int g : {1, 2}) {
      const auto protocol = small_id_broadcast(d, g);
      const auto block = static_cast<std::uint64_t>(d * g);
      for (int t = 0; t < trials; ++t) {
        const std::uint64_t seed = seeds.next();
        const IdAssignment ids = IdAssignment::random(n, static_cast<std::uint64_t>(n * g), seed);
        const SyncOutcome out = run_sync(*protocol, SyncConfig{ids, random_port_mapping(n, seed + 1), SyncWake::all(), seed});
        const std::uint64_t min_id = ids[ids.argmin()].value;
        const auto expect_rounds = static_cast<int>((min_id + block - 1) / block);
        const std::string at = "d=" + std::to_string(d) + " g=" + std::to_string(g) + " trial " + std::to_string(t);
        v.require(leader_count(out) == 1 && out.decisions[static_cast<std::size_t>(ids.argmin())] == Decision::leader,
                  at + ": min-id node not sole leader");
        v.require(decided_all(out), at + ": undecided nodes");
        v.require(out.rounds_used == expect_rounds, at + ": rounds " + std::to_string(out.rounds_used));
        v.require(out.rounds_used <= (n + d - 1) / d, at + ": rounds above ceil(n/d)");
        v.require(out.messages_total <= static_cast<std::int64_t>(block) * (n - 1),
                  at + ": messages " + std::to_string(out.messages_total));
        ++runs;
      }
    }
  }
  v.note(std::to_string(runs) + " runs");
}

// 3. Single-send transform on the improved tradeoff.
void criterion_single_send(const VerifyOptions& opts, Verdict& v) {
  Seeds seeds(opts.seed, 3);
  const int n = 16;
  const int ell = 3;
  const auto plain = improved_afek_gafni(ell);
  const auto single = single_send_transform(plain);
  const int trials = scaled(200, opts);
  int max_rounds = 0;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed = seeds.next();
    SyncConfig cfg{IdAssignment::random(n, n * n, seed), random_port_mapping(n, seed + 1), SyncWake::all(), seed};
    const SyncOutcome a = run_sync(*plain, cfg);
    cfg.max_rounds = n * ell + n;
    const SyncOutcome b = run_sync(*single, cfg);
    const std::string at = "trial " + std::to_string(t);
    v.require(a.decisions == b.decisions, at + ": decisions differ");
    v.require(a.messages_total == b.messages_total, at + ": messages " + std::to_string(a.messages_total) + " vs " +
                                                        std::to_string(b.messages_total));
    v.require(b.rounds_used <= n * ell, at + ": transformed rounds " + std::to_string(b.rounds_used));
    v.require(b.faults.empty(), at + ": transform fault");
    for (std::int64_t m : b.per_round_messages) v.require(m <= n, at + ": more than one send per node in a round");
    max_rounds = std::max(max_rounds, b.rounds_used);
  }
  v.note("transformed rounds max " + std::to_string(max_rounds) + " <= " + std::to_string(n * ell));
}

// 4. Las Vegas three-round construction.
void criterion_las_vegas(const VerifyOptions& opts, Verdict& v) {
  Seeds seeds(opts.seed, 4);
  const auto protocol = opts.las_vegas_factory ? opts.las_vegas_factory() : las_vegas_three_round();
  const int trials = scaled(2000, opts);
  std::vector<double> means;
  for (int n : {64, 256}) {
    int terminated = 0;
    int first_attempt = 0;
    double messages = 0.0;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t seed = seeds.next();
      const SyncOutcome out = run_sync(
          *protocol, SyncConfig{IdAssignment::random(n, static_cast<std::uint64_t>(n) * n, seed),
                                random_port_mapping(n, seed + 1), SyncWake::all(), seed});
      messages += static_cast<double>(out.messages_total);
      if (!decided_all(out)) continue;
      ++terminated;
      v.require(leader_count(out) == 1, "n=" + std::to_string(n) + " trial " + std::to_string(t) +
                                            ": terminated with " + std::to_string(leader_count(out)) + " leaders");
      if (out.rounds_used == 3) ++first_attempt;
    }
    const double rate = static_cast<double>(first_attempt) / trials;
    v.require(rate >= 0.9, "n=" + std::to_string(n) + ": first-attempt rate " + num(rate));
    means.push_back(messages / trials);
    v.note("n=" + std::to_string(n) + " first-attempt " + num(rate) + " terminated " + std::to_string(terminated) + "/" +
           std::to_string(trials) + " mean msgs " + num(means.back(), 6));
  }
  const double ratio = means[1] / means[0];
  v.require(ratio <= 4.4, "mean message ratio " + num(ratio));
  v.note("ratio " + num(ratio) + " <= 4.4");
}

// 5. Two-round adversarial wake-up.
void criterion_two_round(const VerifyOptions& opts, Verdict& v) {
  Seeds seeds(opts.seed, 5);
  const int n = 400;
  const double eps = 0.1;
  const auto protocol = two_round_adversarial(eps);
  const int trials = scaled(5000, opts);
  const double n15 = std::pow(n, 1.5);
  for (const std::string wake : {"single", "all", "half"}) {
    int successes = 0;
    double messages = 0.0;
    std::int64_t worst = 0;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t seed = seeds.next();
      SyncConfig cfg{IdAssignment::random(n, n * n, seed), random_port_mapping(n, seed + 1),
                     parse_wake(wake, n, seed + 2).to_sync(n), seed};
      const SyncOutcome out = run_sync(*protocol, cfg);
      if (leader_count(out) == 1 && decided_all(out)) ++successes;
      v.require(leader_count(out) <= 1, wake + " trial " + std::to_string(t) + ": two leaders");
      messages += static_cast<double>(out.messages_total);
      worst = std::max(worst, out.messages_total);
    }
    const double rate = static_cast<double>(successes) / trials;
    const Interval ci = wilson_interval(successes, trials);
    const double threshold = 1.0 - eps - 1.0 / n - (ci.high - ci.low) / 2.0;
    const double mean = messages / trials;
    v.require(rate >= threshold, wake + ": success " + num(rate) + " < " + num(threshold));
    v.require(mean <= 8.0 * n15 * std::log(1.0 / eps), wake + ": mean messages " + num(mean, 6));
    v.require(static_cast<double>(worst) <= 8.0 * n15 * std::log(n), wake + ": max messages " + std::to_string(worst));
    v.note(wake + " success " + num(rate) + " >= " + num(threshold) + " mean msgs " + num(mean, 6));
  }
}

// 6. Asynchronous tradeoff.
void criterion_async_tradeoff(const VerifyOptions& opts, Verdict& v) {
  Seeds seeds(opts.seed, 6);
  const int trials = scaled(500, opts);
  for (int n : {256, 1024}) {
    for (int k : {2, 3}) {
      const auto protocol = opts.async_tradeoff_factory ? opts.async_tradeoff_factory(k) : async_tradeoff(k);
      const double message_cap = 16.0 * std::pow(n, 1.0 + 1.0 / k);
      for (const std::string sched : {"random", "slow-competes", "fifo-stress"}) {
        int in_time = 0;
        int unique = 0;
        int awake_in_time = 0;
        double worst_time = 0.0;
        for (int t = 0; t < trials; ++t) {
          const std::uint64_t seed = seeds.next();
          AsyncConfig cfg{IdAssignment::random(n, static_cast<std::uint64_t>(n) * n, seed),
                          random_port_mapping(n, seed + 1),
                          parse_wake("single", n, seed + 2).to_async(n),
                          make_scheduler(sched, seed + 3),
                          seed};
          const AsyncOutcome out = run_async(*protocol, cfg);
          const std::string at = "n=" + std::to_string(n) + " k=" + std::to_string(k) + " " + sched + " trial " +
                                 std::to_string(t);
          v.require(!out.scheduler_fault && !out.exhausted && out.protocol_faults.empty(), at + ": run aborted");
          v.require(static_cast<double>(out.messages_total) <= message_cap,
                    at + ": messages " + std::to_string(out.messages_total));
          if (out.elapsed_time <= k + 8) ++in_time;
          if (out.leader_count == 1 && decided_all(out)) ++unique;
          const auto awake = out.all_awake_by();
          if (awake && *awake <= k + 4) ++awake_in_time;
          worst_time = std::max(worst_time, out.elapsed_time);
        }
        const std::string cell = "n=" + std::to_string(n) + " k=" + std::to_string(k) + " " + sched;
        v.require(in_time >= 0.99 * trials, cell + ": within k+8 in " + std::to_string(in_time) + "/" + std::to_string(trials));
        v.require(unique >= (1.0 - 5.0 / n) * trials, cell + ": unique leader in " + std::to_string(unique) + "/" +
                                                          std::to_string(trials));
        v.require(awake_in_time >= 0.99 * trials, cell + ": all awake by k+4 in " + std::to_string(awake_in_time));
        if (sched == "random") v.note(cell + " max time " + num(worst_time) + " unique " + std::to_string(unique));
      }
    }
  }
}

// 7. Asynchronous level algorithm.
void criterion_async_levels(const VerifyOptions& opts, Verdict& v) {
  // Constants are the n=16 maxima times a fixed headroom factor.
  constexpr double kHeadroom = 1.5;
  Seeds seeds(opts.seed, 7);
  const auto protocol = opts.async_levels_factory ? opts.async_levels_factory() : async_levels();
  const int trials = scaled(500, opts);
  double c_messages = 0.0;
  double c_time = 0.0;
  for (int n : {16, 64, 256}) {
    const double lg = std::log2(n);
    double worst_m = 0.0;
    double worst_t = 0.0;
    int unique = 0;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t seed = seeds.next();
      AsyncConfig cfg{IdAssignment::random(n, static_cast<std::uint64_t>(n) * n, seed), random_port_mapping(n, seed + 1),
                      all_at_zero(n), make_scheduler("random", seed + 3), seed};
      const AsyncOutcome out = run_async(*protocol, cfg);
      const std::string at = "n=" + std::to_string(n) + " trial " + std::to_string(t);
      v.require(!out.scheduler_fault && !out.exhausted && out.protocol_faults.empty(), at + ": run aborted");
      if (out.leader_count == 1 && decided_all(out)) ++unique;
      // At most n / 2^i candidates complete level i.
      std::vector<int> reached;
      for (const auto& node : out.nodes) {
        const int level = levels_completed(*node).value_or(-1);
        for (int i = 0; i <= level; ++i) {
          if (static_cast<int>(reached.size()) <= i) reached.resize(static_cast<std::size_t>(i) + 1, 0);
          ++reached[static_cast<std::size_t>(i)];
        }
      }
      for (std::size_t i = 0; i < reached.size(); ++i) {
        v.require(static_cast<std::int64_t>(reached[i]) << i <= n,
                  at + ": " + std::to_string(reached[i]) + " candidates at level " + std::to_string(i));
      }
      worst_m = std::max(worst_m, static_cast<double>(out.messages_total) / (n * lg));
      worst_t = std::max(worst_t, out.elapsed_time / lg);
    }
    v.require(unique == trials, "n=" + std::to_string(n) + ": unique leader in " + std::to_string(unique) + "/" +
                                    std::to_string(trials));
    if (n == 16) {
      c_messages = kHeadroom * worst_m;
      c_time = kHeadroom * worst_t;
      v.note("fit at n=16: C=" + num(c_messages) + " C'=" + num(c_time));
    }
    v.require(worst_m <= c_messages, "n=" + std::to_string(n) + ": messages/(n log n) " + num(worst_m) + " > C");
    v.require(worst_t <= c_time, "n=" + std::to_string(n) + ": time/log n " + num(worst_t) + " > C'");
    v.note("n=" + std::to_string(n) + " max msgs/(n lg n) " + num(worst_m) + " time/lg n " + num(worst_t));
  }
}

// 8. Model properties.
void criterion_model(const VerifyOptions& opts, Verdict& v) {
  Seeds seeds(opts.seed, 8);
  Rng rng(seeds.next());

  const int mappings = scaled(1000, opts);
  for (int t = 0; t < mappings; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 64)(rng);
    const PortMapping pm = random_port_mapping(n, seeds.next());
    bool ok = true;
    for (NodeIndex u = 0; u < n && ok; ++u) {
      std::vector<int> hits(static_cast<std::size_t>(n), 0);
      for (Port p = 1; p < n; ++p) {
        const Endpoint e{u, p};
        const Endpoint r = pm.resolve(e);
        ok = ok && valid_endpoint(n, r) && r.node != u && pm.resolve(r) == e;
        ++hits[static_cast<std::size_t>(r.node)];
      }
      for (NodeIndex w = 0; w < n; ++w) ok = ok && hits[static_cast<std::size_t>(w)] == (w == u ? 0 : 1);
    }
    v.require(ok, "mapping " + std::to_string(t) + " (n=" + std::to_string(n) + ") not a pairing involution");
  }
  v.note(std::to_string(mappings) + " mappings");

  const int runs = scaled(1000, opts);
  const std::vector<std::string> schedulers{"random", "unit", "slow-competes", "fast-wakeups", "fifo-stress"};
  std::int64_t deliveries = 0;
  for (int t = 0; t < runs; ++t) {
    const std::uint64_t seed = seeds.next();
    const bool levels = t % 2 == 1;
    const int n = levels ? 16 : 32;
    AsyncConfig cfg{IdAssignment::random(n, n * n, seed), random_port_mapping(n, seed + 1),
                    levels ? all_at_zero(n) : parse_wake("single", n, seed + 2).to_async(n),
                    make_scheduler(schedulers[static_cast<std::size_t>(t) % schedulers.size()], seed + 3), seed};
    cfg.trace = true;
    const AsyncOutcome out = run_async(levels ? *async_levels() : *async_tradeoff(2), cfg);
    const TraceAudit audit = audit_trace(out.trace);
    const std::string at = "async run " + std::to_string(t);
    v.require(!out.scheduler_fault, at + ": scheduler fault");
    v.require(audit.delay_violations == 0, at + ": delay outside (0,1]");
    v.require(audit.fifo_violations == 0, at + ": FIFO violated");
    v.require(audit.unmatched == 0 && audit.deliveries == out.messages_total, at + ": unmatched trace events");
    deliveries += audit.deliveries;
  }
  v.note(std::to_string(runs) + " audited runs, " + std::to_string(deliveries) + " deliveries");

  // Weak components against BFS: every directed graph for n <= 4, every
  // undirected skeleton for n = 5, 6, random graphs for n = 7..10.
  std::int64_t graphs = 0;
  for (int n = 1; n <= 6; ++n) {
    std::vector<std::pair<int, int>> slots;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a != b && (n <= 4 || a < b)) slots.emplace_back(a, b);
      }
    }
    const std::uint64_t count = std::uint64_t{1} << slots.size();
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      // Skeleton edges get a pseudo-random direction.
      const std::uint64_t flips = splitmix64(mask);
      std::vector<std::pair<int, int>> edges;
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if ((mask >> i) & 1U) {
          auto e = slots[i];
          if (n > 4 && ((flips >> i) & 1U)) std::swap(e.first, e.second);
          edges.push_back(e);
        }
      }
      v.require(components_match(n, edges), "weak components differ from BFS (n=" + std::to_string(n) + ")");
      ++graphs;
    }
  }
  for (int n = 7; n <= 10; ++n) {
    for (int t = 0; t < scaled(2000, opts); ++t) {
      const double p = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
      std::vector<std::pair<int, int>> edges;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          if (a != b && std::bernoulli_distribution(p / 2)(rng)) edges.emplace_back(a, b);
        }
      }
      v.require(components_match(n, edges), "weak components differ from BFS (n=" + std::to_string(n) + ")");
      ++graphs;
    }
  }
  // Every possible answer: each set partition of [n], n <= 10, enumerated as
  // a restricted growth string and realized by a random graph.
  std::int64_t partitions = 0;
  for (int n = 1; n <= 10; ++n) {
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    std::vector<int> top(static_cast<std::size_t>(n), 0);  // max label in a[0..i]
    while (true) {
      const auto edges = realize_partition(a, rng);
      std::vector<std::vector<NodeIndex>> expect(static_cast<std::size_t>(top.back() + 1));
      for (int u = 0; u < n; ++u) expect[static_cast<std::size_t>(a[static_cast<std::size_t>(u)])].push_back(u);
      CommGraph g(n);
      for (auto [x, y] : edges) g.record_send(x, y);
      v.require(weak_components(g) == expect && bfs_components(n, edges) == expect,
                "partition not recovered (n=" + std::to_string(n) + ")");
      ++partitions;
      // Next restricted growth string.
      int i = n - 1;
      while (i > 0 && a[static_cast<std::size_t>(i)] > top[static_cast<std::size_t>(i - 1)]) --i;
      if (i == 0) break;
      ++a[static_cast<std::size_t>(i)];
      top[static_cast<std::size_t>(i)] = std::max(top[static_cast<std::size_t>(i - 1)], a[static_cast<std::size_t>(i)]);
      for (int j = i + 1; j < n; ++j) {
        a[static_cast<std::size_t>(j)] = 0;
        top[static_cast<std::size_t>(j)] = top[static_cast<std::size_t>(i)];
      }
    }
  }
  v.note(std::to_string(graphs) + " graphs vs BFS; all " + std::to_string(partitions) +
         " partitions of n <= 10 recovered");
}

// 9. Capacity isolation under the isolating adversary.
void criterion_capacity(const VerifyOptions& opts, Verdict& v) {
  Seeds seeds(opts.seed, 9);
  std::int64_t checks = 0;
  std::int64_t nontrivial = 0;
  std::int64_t violations = 0;
  int runs = 0;
  auto run_one = [&](const SyncProtocol& protocol, const IdAssignment& ids, const std::string& at, int max_rounds,
                     NodeIndex expected_leader) {
    const int n = ids.size();
    auto adversary = std::make_shared<IsolatingPortAdversary>(n);
    SyncConfig cfg{ids, adversary, SyncWake::all(), seeds.next(), max_rounds};
    const SyncOutcome out = run_sync(protocol, cfg);
    checks += adversary->checks();
    nontrivial += adversary->nontrivial_checks();
    violations += adversary->violations();
    v.require(adversary->violations() == 0, at + ": isolation violated");
    v.require(leader_count(out) == 1 && out.decisions[static_cast<std::size_t>(expected_leader)] == Decision::leader,
              at + ": wrong leader under adaptive wiring");
    // The adaptive wiring must be the prefix of some fixed mapping that
    // replays the same run.
    try {
      cfg.wiring = adversary->complete(seeds.next());
      const SyncOutcome replay = run_sync(protocol, cfg);
      v.require(replay.decisions == out.decisions && replay.messages_total == out.messages_total,
                at + ": completed mapping does not replay the run");
    } catch (const std::exception& e) {
      v.require(false, at + ": completion failed: " + e.what());
    }
    ++runs;
  };

  const int draws = scaled(10, opts);
  for (int n : {16, 64, 256}) {
    for (int ell : {3, 5, 7}) {
      const auto protocol = improved_afek_gafni(ell);
      for (int t = 0; t < draws; ++t) {
        const IdAssignment ids = IdAssignment::random(n, static_cast<std::uint64_t>(n) * n, seeds.next());
        run_one(*protocol, ids, "improved_ag n=" + std::to_string(n) + " ell=" + std::to_string(ell), 0, ids.argmax());
      }
    }
  }
  for (int d : {1, 2, 4}) {
    for (int g : {1, 2}) {
      const auto protocol = small_id_broadcast(d, g);
      for (int t = 0; t < draws; ++t) {
        const IdAssignment ids = IdAssignment::random(8, static_cast<std::uint64_t>(8 * g), seeds.next());
        run_one(*protocol, ids, "small_id d=" + std::to_string(d) + " g=" + std::to_string(g), 0, ids.argmin());
      }
    }
  }
  const auto transformed = single_send_transform(improved_afek_gafni(3));
  for (int t = 0; t < draws; ++t) {
    const IdAssignment ids = IdAssignment::random(16, 256, seeds.next());
    run_one(*transformed, ids, "single-send improved_ag", 16 * 3 + 16, ids.argmax());
  }
  v.require(nontrivial > 0, "no component opened a port within its capacity");
  v.note(std::to_string(runs) + " runs, " + std::to_string(checks) + " component checks (" +
         std::to_string(nontrivial) + " with t >= 1), " + std::to_string(violations) + " violations");
}

using CriterionFn = void (*)(const VerifyOptions&, Verdict&);

struct Entry {
  CriterionInfo info;
  CriterionFn fn;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> all{
      {{1, "improved_ag", 60}, criterion_improved_ag},
      {{2, "small_id", 5}, criterion_small_id},
      {{3, "single_send", 5}, criterion_single_send},
      {{4, "las_vegas", 120}, criterion_las_vegas},
      {{5, "two_round", 180}, criterion_two_round},
      {{6, "async_tradeoff", 240}, criterion_async_tradeoff},
      {{7, "async_levels", 120}, criterion_async_levels},
      {{8, "model", 30}, criterion_model},
      {{9, "capacity", 60}, criterion_capacity},
  };
  return all;
}

}  // namespace

const std::vector<CriterionInfo>& acceptance_criteria() {
  static const std::vector<CriterionInfo> infos = [] {
    std::vector<CriterionInfo> out;
    for (const auto& e : entries()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

std::vector<CriterionResult> run_acceptance(const VerifyOptions& opts) {
  std::vector<const Entry*> selected;
  for (const auto& e : entries()) {
    if (opts.only.empty() || std::ranges::find(opts.only, e.info.name) != opts.only.end() ||
        std::ranges::find(opts.only, std::to_string(e.info.id)) != opts.only.end()) {
      selected.push_back(&e);
    }
  }
  for (const auto& name : opts.only) {
    const bool known = std::ranges::any_of(entries(), [&](const Entry& e) {
      return e.info.name == name || std::to_string(e.info.id) == name;
    });
    if (!known) throw ConfigError("unknown acceptance criterion '" + name + "'");
  }

  std::vector<CriterionResult> results;
  for (const Entry* e : selected) {
    const auto started = std::chrono::steady_clock::now();
    Verdict verdict;
    try {
      e->fn(opts, verdict);
    } catch (const std::exception& ex) {
      verdict.require(false, std::string("exception: ") + ex.what());
    }
    CriterionResult r;
    r.id = e->info.id;
    r.name = e->info.name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    r.budget_seconds = e->info.budget_seconds;
    verdict.require(r.seconds <= r.budget_seconds, "runtime " + num(r.seconds) + " s over budget");
    r.passed = verdict.passed();
    r.detail = verdict.detail();
    if (opts.progress != nullptr) *opts.progress << format_result(r) << std::endl;
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << "  " << r.id << ' ' << std::left << std::setw(15) << r.name << ' ' << r.detail
     << "  [" << std::fixed << std::setprecision(1) << r.seconds << " s / " << std::setprecision(0)
     << r.budget_seconds << " s]";
  return os.str();
}

}  // namespace cliquelab
