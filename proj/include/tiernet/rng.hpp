#pragma once

#include <cstdint>

namespace tiernet {

// splitmix64 finalizer; used both as a seed mixer and as a counter-based
// generator for lazily materialized node positions.
constexpr std::uint64_t
SplitMix64 (std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent sub-streams of one run seed.
enum class Stream : std::uint64_t
{
  PrimaryPpp = 1,
  SecondaryPpp,
  SecondaryPositions,
  PrimaryPairing,
  SecondaryPairing,
  Relays,
  SegmentRelays,
  SecondaryTraffic,
  FlowSample,
  PrimaryTraffic,
};

constexpr std::uint64_t
DeriveSeed (std::uint64_t seed, Stream stream)
{
  return SplitMix64 (seed ^ SplitMix64 (static_cast<std::uint64_t> (stream) * 0x632be59bd9b4e019ULL));
}

// Uniform double in [0,1) that depends only on (key, counter).
constexpr double
HashUniform (std::uint64_t key, std::uint64_t counter)
{
  return static_cast<double> (SplitMix64 (key ^ SplitMix64 (counter)) >> 11) * 0x1.0p-53;
}

} // namespace tiernet
