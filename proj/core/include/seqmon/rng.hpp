#pragma once

#include <cstdint>
#include <random>

namespace seqmon {

// SplitMix64 finalizer; maps nearby seeds to decorrelated values.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Generator for the index-th substream of a master seed.  Each (seed, index)
// pair gets its own engine, so draws do not depend on how work is scheduled
// across threads.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64{splitmix64(seed ^ splitmix64(index))};
}

}  // namespace seqmon
