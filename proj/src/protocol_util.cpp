#include <cmath>
#include <limits>

#include "cliquelab/protocols.hpp"

namespace cliquelab {

int ceil_sqrt(int n) {
  if (n <= 0) return 0;
  auto r = static_cast<int>(std::sqrt(static_cast<double>(n)));
  while (static_cast<long long>(r) * r < n) ++r;
  while (r > 0 && static_cast<long long>(r - 1) * (r - 1) >= n) --r;
  return r;
}

std::uint64_t rank_upper_bound(int n) {
  const auto un = static_cast<std::uint64_t>(std::max(n, 1));
  std::uint64_t out = 1;
  for (int i = 0; i < 4; ++i) {
    if (out > std::numeric_limits<std::uint64_t>::max() / un) return std::numeric_limits<std::uint64_t>::max();
    out *= un;
  }
  return out;
}

}  // namespace cliquelab
