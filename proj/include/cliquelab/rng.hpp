#pragma once

#include <cstdint>
#include <random>

namespace cliquelab {

using Rng = std::mt19937_64;

// Stream tags keep the randomness consumed by different parts of a run
// independent of each other. Node tapes depend only on (seed, node index).
enum class Stream : std::uint64_t {
  ids = 1,
  mapping = 2,
  node_tape = 3,
  scheduler = 4,
  wake = 5,
  completion = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, Stream stream,
                                 std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return splitmix64(h ^ (index * 0xd1b54a32d192ed03ULL));
}

inline Rng make_rng(std::uint64_t base, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(base, stream, index));
}

}  // namespace cliquelab
