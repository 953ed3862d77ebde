#ifndef OCD_RANDOM_H_
#define OCD_RANDOM_H_

#include <cstdint>
#include <random>

namespace ocd {

using Rng = std::mt19937_64;

// Derives an independent stream seed from (root, index) with a SplitMix64
// finalizer. Streams for trees, projections, trials and row blocks are keyed
// by their index, so results do not depend on evaluation order.
inline std::uint64_t DeriveSeed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng MakeRng(std::uint64_t root, std::uint64_t index) {
  return Rng(DeriveSeed(root, index));
}

}  // namespace ocd

#endif  // OCD_RANDOM_H_
