#pragma once

#include <cstdint>
#include <random>

namespace relaybeam {

/// Purpose tags separating the random streams used within one slot.
enum class StreamPurpose : std::uint64_t {
  kField = 0x6669656c64ULL,   // log-domain channel draw
  kPhase = 0x7068617365ULL,   // fading phases
  kMotion = 0x6d6f74696fULL,  // random-walk baseline targets
  kJensen = 0x6a656e73ULL,    // debug-mode conditional Monte Carlo
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream id: depends only on its inputs, never on execution order.
inline std::uint64_t stream_id(std::uint64_t master_seed, std::uint64_t trial, std::uint64_t slot,
                               std::uint64_t purpose) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ trial);
  h = splitmix64(h ^ (slot * 0x100000001b3ULL));
  return splitmix64(h ^ purpose);
}

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t master_seed, std::uint64_t trial, std::uint64_t slot,
                       StreamPurpose purpose) {
  return Rng(stream_id(master_seed, trial, slot, static_cast<std::uint64_t>(purpose)));
}

}  // namespace relaybeam
