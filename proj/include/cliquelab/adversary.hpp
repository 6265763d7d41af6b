#pragma once

// Adversarial strategies: wake-up sets, adaptive port wiring that keeps
// components isolated while their capacity lasts, and hostile schedulers.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cliquelab/async_engine.hpp"
#include "cliquelab/net_model.hpp"
#include "cliquelab/sync_engine.hpp"

namespace cliquelab {

struct WakeStrategy {
  enum class Mode : std::uint8_t { all_at_round_1, single, subset, async_schedule };

  Mode mode = Mode::all_at_round_1;
  std::vector<NodeIndex> nodes;             // single, subset
  std::vector<SpontaneousWake> schedule;    // async_schedule

  static WakeStrategy all() { return {}; }
  static WakeStrategy single(NodeIndex u) { return {Mode::single, {u}, {}}; }
  static WakeStrategy subset(std::vector<NodeIndex> s) { return {Mode::subset, std::move(s), {}}; }
  static WakeStrategy timed(std::vector<SpontaneousWake> s) { return {Mode::async_schedule, {}, std::move(s)}; }

  // Throws ConfigError for an empty set or a node outside [0, n).
  SyncWake to_sync(int n) const;
  // Round-based modes wake their nodes at time 0.
  std::vector<SpontaneousWake> to_async(int n) const;
};

// A uniformly random subset of size max(1, n/2).
std::vector<NodeIndex> random_half(int n, std::uint64_t seed);

struct GrowthRow {
  int round = 0;
  int component_count = 0;
  int max_component_size = 0;
  std::int64_t messages_so_far = 0;
};

// Decides the partner of each port when it is first opened. A node whose
// round-start component still has spare capacity is wired to the
// lowest-index member of that component it is not yet connected to;
// otherwise it is wired into the smallest other component (ties broken by
// smallest member), merging the two.
//
// At every round end the wiring checks each round-start component C that
// opened t <= capacity(C) ports in the round: no message sent by a member
// of C may have reached a node outside C.
class IsolatingPortAdversary final : public PortWiring {
 public:
  explicit IsolatingPortAdversary(int n);

  void on_round_begin(int round, std::span<const Endpoint> planned) override;
  Endpoint route(Endpoint from) override;
  void on_round_end(int round, const CommGraph& graph, std::int64_t messages_so_far) override;

  const PartialPortMapping& partial() const { return partial_; }
  PortMapping complete(std::uint64_t seed) const { return partial_.complete(seed); }

  // Current components, sorted, ordered by smallest member.
  std::vector<std::vector<NodeIndex>> components() const;

  std::int64_t checks() const { return checks_; }
  // Checks of components that opened at least one new port; the others hold
  // trivially.
  std::int64_t nontrivial_checks() const { return nontrivial_checks_; }
  std::int64_t violations() const { return violations_; }
  const std::vector<GrowthRow>& growth() const { return growth_; }

 private:
  NodeIndex find(NodeIndex u) const;
  void unite(NodeIndex a, NodeIndex b);
  void snapshot(const CommGraph& graph);
  std::optional<NodeIndex> pick_inside(NodeIndex u) const;
  NodeIndex pick_outside(NodeIndex u) const;
  bool is_planned(Endpoint e) const;
  Port target_port(NodeIndex v) const;

  int n_;
  PartialPortMapping partial_;
  mutable std::vector<NodeIndex> parent_;
  std::vector<int> size_;

  // Round-start components and their spare capacity.
  std::vector<int> start_comp_;  // node -> index into start_members_
  std::vector<std::vector<NodeIndex>> start_members_;
  std::vector<int> start_capacity_;
  std::vector<int> spare_;   // capacity left for wiring inside
  std::vector<int> opened_;  // ports newly opened this round, per start component
  std::vector<std::uint8_t> planned_;  // endpoint slots sent on this round

  std::int64_t checks_ = 0;
  std::int64_t nontrivial_checks_ = 0;
  std::int64_t violations_ = 0;
  std::vector<GrowthRow> growth_;
};

void write_growth_csv(std::ostream& os, std::span<const GrowthRow> rows);

// Compete and consult messages take a full unit, everything else 0.01.
SchedulerPtr slow_competes();
// Wake-up messages take 0.01, every election message a full unit.
SchedulerPtr fast_wakeups_slow_elections();
// Random delays with a per-link bias (always slow, always fast, bursty or
// uniform), kept inside the FIFO and (0,1] contract by clamping.
SchedulerPtr fifo_stress(std::uint64_t seed);

}  // namespace cliquelab
