#pragma once

#include <algorithm>
#include <iterator>
#include <numeric>
#include <vector>

#include "cliquelab/net_model.hpp"
#include "cliquelab/rng.hpp"

namespace cliquelab::detail {

// `count` distinct ports of 1..n-1 chosen uniformly without replacement.
inline std::vector<Port> sample_ports(Rng& rng, int n, int count) {
  std::vector<Port> ports(static_cast<std::size_t>(std::max(n - 1, 0)));
  std::iota(ports.begin(), ports.end(), 1);
  std::vector<Port> out;
  out.reserve(static_cast<std::size_t>(std::clamp(count, 0, std::max(n - 1, 0))));
  std::ranges::sample(ports, std::back_inserter(out), std::max(count, 0), rng);
  return out;
}

inline bool coin(Rng& rng, double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return std::bernoulli_distribution(p)(rng);
}

}  // namespace cliquelab::detail
