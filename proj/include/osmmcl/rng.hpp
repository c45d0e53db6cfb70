#pragma once

#include <cstdint>
#include <random>

namespace osmmcl {

using Rng = std::mt19937_64;

/// Named sub-streams derived from a run seed. Every random draw in the library comes from
/// a stream identified by (seed, stream, index...), never from ambient entropy.
enum class Stream : std::uint64_t {
  kInitialize = 1,
  kPropagate = 2,
  kResample = 3,
  kTrajectory = 4,
  kScan = 5,
  kOdometry = 6,
  kTest = 99,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                                 std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ a);
  return splitmix64(h ^ b);
}

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(derive_seed(seed, stream, a, b));
}

}  // namespace osmmcl
