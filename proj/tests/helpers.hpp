#pragma once

#include "tiernet/config.hpp"
#include "tiernet/geometry.hpp"

#include <cmath>
#include <utility>

namespace tiernet::test {

inline SimConfig
SmallConfig (double n, std::uint64_t seed = 1)
{
  SimConfig c;
  c.n = n;
  c.seed = seed;
  c.frames = 6;
  c.warmupFrames = 2;
  return c;
}

// Largest k with 1/k^2 >= target, by counting up.
inline int
LargestSideFor (double target)
{
  int k = 1;
  while (1.0 / ((k + 1.0) * (k + 1.0)) >= target)
    ++k;
  return k;
}

// Reference (k_p, k_s) by direct search, independent of the library's rounding code.
inline std::pair<int, int>
ReferenceSides (double n, double beta, double apScale)
{
  const double targetP = apScale * 2.0 * std::log (n) / n;
  const int kp = LargestSideFor (targetP);
  const double ap = 1.0 / (kp * kp);
  const double m = std::pow (n, beta);
  const double targetS = beta * beta * n * n * ap * ap / (2.0 * m * std::log (m));
  int q = 1;
  while (1.0 / std::pow (kp * (q + 1.0), 2) >= targetS)
    ++q;
  return {kp, kp * q};
}

} // namespace tiernet::test
