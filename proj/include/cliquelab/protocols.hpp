#pragma once

// The leader-election protocols, as node state machines over the engine
// contracts. Factories validate parameters and throw ConfigError.

#include <cstdint>
#include <optional>
#include <vector>

#include "cliquelab/async_engine.hpp"
#include "cliquelab/sync_engine.hpp"

namespace cliquelab {

// Deterministic, simultaneous wake-up, odd ell >= 3 rounds. Runs
// k = (ell+3)/2 with k-2 two-round referee iterations followed by a final
// broadcast round among survivors. Elects the maximum identity.
SyncProtocolPtr improved_afek_gafni(int ell);

// Per-iteration fanouts f_1..f_{k-2}: min(ceil(n^{i/(k-1)}), ports still
// unused by the survivor).
std::vector<int> improved_ag_fanouts(int n, int ell);

// Deterministic, identities in [1, n*g]. In round i the nodes whose identity
// falls in block i broadcast it; every receiver elects the smallest
// identity seen and halts.
SyncProtocolPtr small_id_broadcast(int d, int g);

// Randomized, simultaneous wake-up. Three-round attempts of candidate /
// referee competition followed by an announcement round; all nodes restart
// unless exactly one announcement was observed.
SyncProtocolPtr las_vegas_three_round(double a = 4.0, double b = 4.0);

int las_vegas_referee_count(int n, double b);

// Randomized, adversarial wake-up, two rounds. May fail with no leader.
SyncProtocolPtr two_round_adversarial(double epsilon);

// ceil(sqrt(n)), computed exactly.
int ceil_sqrt(int n);

// Randomized asynchronous tradeoff; elapsed time about k+8 units.
AsyncProtocolPtr async_tradeoff(int k, double gamma = 4.0);

int async_tradeoff_max_k(int n);
int async_wake_fanout(int n, int k, double gamma);
int async_referee_count(int n);

// Deterministic asynchronous level algorithm; O(log n) time and
// O(n log n) messages under simultaneous wake-up.
AsyncProtocolPtr async_levels();

// Highest level whose acknowledgements a levels node collected, or -1.
// nullopt if `node` does not run the levels protocol.
std::optional<int> levels_completed(const AsyncNode& node);

// Rank range [1, n^4], saturating at the largest 64-bit value.
std::uint64_t rank_upper_bound(int n);

}  // namespace cliquelab
