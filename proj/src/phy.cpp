#include "tiernet/phy.hpp"

#include "tiernet/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace tiernet {

double
Pathloss (double r, double alpha)
{
  if (!(r > 0.0))
    throw std::domain_error ("pathloss needs a positive distance");
  return std::pow (r, -alpha);
}

double
TxPower (double cellArea, double powerConst, double alpha)
{
  if (!(cellArea > 0.0 && cellArea <= 1.0))
    throw std::invalid_argument ("cell area must lie in (0, 1]");
  if (!(powerConst > 0.0))
    throw std::invalid_argument ("power constant must be positive");
  return powerConst * std::pow (cellArea, alpha / 2.0);
}

namespace {

// Gain from squared distance; alpha = 4 avoids pow.
inline double
GainSq (double d2, double alpha)
{
  if (!(d2 > 0.0))
    throw std::domain_error ("co-located transmitter and receiver");
  if (alpha == 4.0)
    return 1.0 / (d2 * d2);
  return std::pow (d2, -alpha / 2.0);
}

inline double
DistSq (Point a, Point b)
{
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct ActiveTx
{
  NodeId node = kNoNode;
  Point position;
  double power = 0.0;
};

struct Reception
{
  std::size_t tx = 0; // index into the emitter list
  NodeId rxNode = kNoNode;
  Point rx;
  LinkCategory category = LinkCategory::PrimaryReception;
};

} // namespace

double
Sinr (const LinkSample &link, double alpha)
{
  const double signal = link.txPower * GainSq (DistSq (link.tx, link.rx), alpha);
  double interference = 0.0;
  for (const auto &e : link.interferers)
    interference += e.power * GainSq (DistSq (e.position, link.rx), alpha);
  const double denom = link.noise + interference;
  return denom == 0.0 ? std::numeric_limits<double>::infinity () : signal / denom;
}

const CategoryMin &
RateReport::Get (LinkCategory c) const
{
  switch (c)
    {
    case LinkCategory::PrimaryReception:
      return primary;
    case LinkCategory::Delivery:
      return delivery;
    default:
      return secondary;
    }
}

void
RateReport::Merge (const RateReport &other)
{
  auto merge = [] (CategoryMin &a, const CategoryMin &b) {
    a.minSinr = std::min (a.minSinr, b.minSinr);
    a.links += b.links;
  };
  merge (primary, other.primary);
  merge (delivery, other.delivery);
  merge (secondary, other.secondary);
  exclusionViolations += other.exclusionViolations;
  slotsAudited += other.slotsAudited;
}

RateReport
MinRateAudit (const Deployment &d, const RelayAssignment &relays, std::span<const AuditSlot> slots,
              const AuditOptions &options)
{
  if (options.stride <= 0)
    throw std::invalid_argument ("audit stride must be positive");
  const CellGrid &pg = d.PrimaryGrid ();
  const CellGrid &sg = d.SecondaryGrid ();
  const double primaryPower = TxPower (pg.CellArea (), options.powerConst, options.alpha);
  const double secondaryPower = TxPower (sg.CellArea (), options.powerConst, options.alpha);
  const ActivityTable secondaryActivity (sg);

  RateReport report;
  std::vector<ActiveTx> emitters;
  std::vector<Reception> receptions;
  std::vector<bool> blocked;
  for (const AuditSlot &slot : slots)
    {
      const SlotIndex base{slot.primarySlot, 0};
      const Subframe sub = base.GetSubframe ();
      blocked = BlockedSecondaryCells (slot.preservation, sg);
      for (int s = 0; s < kSlotsPerFrame; s += options.stride)
        {
          emitters.clear ();
          receptions.clear ();
          auto schedule = [&] (const std::vector<std::vector<AuditSlot::Link>> &groups, LinkCategory cat) {
            for (const auto &links : groups)
              {
                if (links.empty ())
                  continue;
                // Sources of one cell share the primary slot in TDMA order.
                const auto &link = links[static_cast<std::size_t> (s) * links.size () / kSlotsPerFrame];
                emitters.push_back ({link.tx, d.Position (link.tx), primaryPower});
                receptions.push_back ({emitters.size () - 1, link.rx, d.Position (link.rx), cat});
              }
          };
          schedule (slot.primaryCells, LinkCategory::PrimaryReception);
          if (sub == Subframe::Delivery)
            schedule (slot.deliveries, LinkCategory::Delivery);
          else
            {
              for (CellCoord cell : secondaryActivity.Active (s))
                {
                  const std::size_t idx = sg.IndexOf (cell);
                  const NodeId tx = relays.secondaryCellRelay[idx];
                  if (tx == kNoNode || blocked[idx])
                    continue;
                  for (const auto &region : slot.preservation)
                    report.exclusionViolations += region.secondaryCells.Contains (cell) ? 1 : 0;
                  emitters.push_back ({tx, d.Position (tx), secondaryPower});
                  if (!options.includeSecondary)
                    continue;
                  const CellCoord next{cell.col + 1 < sg.SideCount () ? cell.col + 1 : cell.col - 1, cell.row};
                  if (!sg.Contains (next))
                    continue;
                  const NodeId rx = relays.secondaryCellRelay[sg.IndexOf (next)];
                  if (rx == kNoNode)
                    continue;
                  receptions.push_back ({emitters.size () - 1, rx, d.Position (rx), LinkCategory::Secondary});
                }
            }

          for (const Reception &r : receptions)
            {
              const ActiveTx &tx = emitters[r.tx];
              const double signal = tx.power * GainSq (DistSq (tx.position, r.rx), options.alpha);
              double interference = 0.0;
              for (std::size_t e = 0; e < emitters.size (); ++e)
                {
                  if (e == r.tx || emitters[e].node == r.rxNode || emitters[e].node == tx.node)
                    continue;
                  interference += emitters[e].power * GainSq (DistSq (emitters[e].position, r.rx), options.alpha);
                }
              const double denom = options.noise + interference;
              const double sinr = denom == 0.0 ? std::numeric_limits<double>::infinity () : signal / denom;
              switch (r.category)
                {
                case LinkCategory::PrimaryReception:
                  report.primary.Add (sinr);
                  break;
                case LinkCategory::Delivery:
                  report.delivery.Add (sinr);
                  break;
                case LinkCategory::Secondary:
                  report.secondary.Add (sinr);
                  break;
                }
            }
          ++report.slotsAudited;
        }
    }
  return report;
}

} // namespace tiernet
