#pragma once

#include "tiernet/geometry.hpp"
#include "tiernet/routing.hpp"
#include "tiernet/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace tiernet {

/// g(r) = r^-alpha. Throws std::domain_error for r <= 0.
double Pathloss (double r, double alpha);

/// P * a^(alpha/2).
double TxPower (double cellArea, double powerConst, double alpha);

struct Emitter
{
  Point position;
  double power = 0.0;
};

struct LinkSample
{
  Point tx;
  Point rx;
  double txPower = 0.0;
  std::vector<Emitter> interferers;
  double noise = 0.0;
};

/// Signal over noise plus summed interference. Throws std::domain_error when
/// tx coincides with rx or an interferer sits on the receiver.
double Sinr (const LinkSample &link, double alpha);

inline double
Rate (double sinr)
{
  return std::log2 (1.0 + sinr);
}

enum class LinkCategory : std::uint8_t
{
  PrimaryReception,
  Delivery,
  Secondary
};

struct CategoryMin
{
  double minSinr = std::numeric_limits<double>::infinity ();
  std::uint64_t links = 0;

  double MinRate () const { return links == 0 ? 0.0 : Rate (minSinr); }
  void Add (double sinr)
  {
    minSinr = std::min (minSinr, sinr);
    ++links;
  }
};

struct RateReport
{
  CategoryMin primary;
  CategoryMin delivery;
  CategoryMin secondary;
  std::uint64_t exclusionViolations = 0; ///< secondary emitters inside a preservation region
  std::uint64_t slotsAudited = 0;

  const CategoryMin &Get (LinkCategory c) const;
  void Merge (const RateReport &other);
};

struct AuditOptions
{
  int stride = 4;               ///< audit every stride-th secondary slot
  bool includeSecondary = true; ///< evaluate intra-secondary receptions
  double alpha = 4.0;
  double powerConst = 1.0;
  double noise = 1.0;
};

/// SINR of every scheduled reception in the recorded slots against the full
/// concurrent transmitter set of both tiers.
RateReport MinRateAudit (const Deployment &d, const RelayAssignment &relays, std::span<const AuditSlot> slots,
                         const AuditOptions &options);

} // namespace tiernet
