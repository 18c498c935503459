#include "tiernet/transport.hpp"

#include "tiernet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

namespace tiernet {

std::uint32_t
RelayCount (double m)
{
  if (!(m > 1.0))
    return 1;
  const double raw = std::floor (std::sqrt (m / std::log (m)));
  return static_cast<std::uint32_t> (std::max (1.0, raw));
}

std::int64_t
SegmentBundle::SynchronizationGap () const
{
  if (arrivalGlobal.empty ())
    return 0;
  const auto [lo, hi] = std::minmax_element (arrivalGlobal.begin (), arrivalGlobal.end ());
  return *hi - *lo;
}

std::int64_t
RelaySubframeSlotsBetween (std::int64_t g0, std::int64_t g1)
{
  std::int64_t total = 0;
  for (std::int64_t t = g0 / kSlotsPerFrame; t * kSlotsPerFrame < g1; ++t)
    {
      if (t % kSubframes != static_cast<int> (Subframe::PrimaryRelay))
        continue;
      const std::int64_t lo = std::max (g0, t * kSlotsPerFrame);
      const std::int64_t hi = std::min (g1, (t + 1) * kSlotsPerFrame);
      total += std::max<std::int64_t> (0, hi - lo);
    }
  return total;
}

// ---------------------------------------------------------------------------
// TransportState
// ---------------------------------------------------------------------------

TransportState::TransportState (const Deployment &d, const RelayAssignment &relays, std::uint32_t relayCount)
  : m_d (&d),
    m_relays (&relays),
    m_relayCount (relayCount),
    m_buckets (d.SecondaryGrid ().CellCount ())
{
}

std::uint64_t
TransportState::FlowKey (const Item &item) const
{
  if (!item.isSegment)
    return item.ref < m_records.size () ? m_records[item.ref].flow : 0;
  return (1ull << 63) | (static_cast<std::uint64_t> (item.ref) << 24) | item.segment;
}

const std::vector<std::uint32_t> &
TransportState::PathOf (const Item &item) const
{
  return item.isSegment ? m_bundles[item.ref].path : m_flows[m_records[item.ref].flow].path;
}

std::uint32_t
TransportState::NewItem (const Item &item)
{
  if (!m_freeItems.empty ())
    {
      const std::uint32_t id = m_freeItems.back ();
      m_freeItems.pop_back ();
      m_items[id] = item;
      return id;
    }
  m_items.push_back (item);
  return static_cast<std::uint32_t> (m_items.size () - 1);
}

std::vector<std::uint32_t>
TransportState::SecondaryRoute (std::size_t fromCell, std::size_t toCell) const
{
  const CellGrid &sg = m_d->SecondaryGrid ();
  const CellPath hv = HvPath (sg.CoordOf (fromCell), sg.CoordOf (toCell), sg);
  std::vector<std::uint32_t> route;
  route.reserve (hv.Length ());
  for (std::size_t i = 0; i < hv.cells.size (); ++i)
    {
      const std::size_t c = sg.IndexOf (hv.cells[i]);
      const bool endpoint = i == 0 || i + 1 == hv.cells.size ();
      // No designated relay in an empty cell: hop over it.
      if (endpoint || m_d->secondary.CellCount (c) > 0)
        route.push_back (static_cast<std::uint32_t> (c));
    }
  return route;
}

std::uint32_t
TransportState::AddSecondaryFlow (NodeId source, NodeId destination)
{
  SecondaryFlow flow;
  flow.source = source;
  flow.destination = destination;
  const std::size_t from = m_d->secondary.CellOf (source);
  const std::size_t to = m_d->secondary.CellOf (destination);
  flow.path = SecondaryRoute (from, to);
  const CellGrid &sg = m_d->SecondaryGrid ();
  const CellCoord a = sg.CoordOf (from);
  const CellCoord b = sg.CoordOf (to);
  flow.hvLength = static_cast<std::uint32_t> (std::abs (a.col - b.col) + std::abs (a.row - b.row) + 1);
  m_flows.push_back (std::move (flow));
  return static_cast<std::uint32_t> (m_flows.size () - 1);
}

std::uint32_t
TransportState::InjectSecondary (std::uint32_t flow, const SlotIndex &when)
{
  PacketRecord rec;
  rec.id = static_cast<std::uint32_t> (m_records.size ());
  rec.tier = Tier::Secondary;
  rec.source = m_flows[flow].source;
  rec.destination = m_flows[flow].destination;
  rec.creationSlot = when.SecondaryClock ();
  rec.creationPrimarySlot = when.primarySlot;
  rec.pathLength = m_flows[flow].hvLength;
  rec.flow = flow;
  m_records.push_back (rec);
  const std::uint32_t item = NewItem ({rec.id, 0, 0, false});
  m_buckets[m_flows[flow].path.front ()].push_back (item);
  ++m_secondary.injected;
  ++m_secondary.inFlight;
  return rec.id;
}

NodeId
TransportState::IntermediateDestination (std::size_t relayPrimaryCell, std::size_t sinkCell)
{
  const auto key = std::make_pair (relayPrimaryCell, sinkCell);
  if (auto it = m_intermediateCache.find (key); it != m_intermediateCache.end ())
    return it->second;
  const CellGrid &pg = m_d->PrimaryGrid ();
  const Point target = pg.Center (pg.CoordOf (sinkCell));
  NodeId best = kNoNode;
  double bestDist = std::numeric_limits<double>::infinity ();
  m_d->ForEachSecondaryInPrimaryCell (relayPrimaryCell, [&] (NodeId id) {
    const double dist = Distance (m_d->Position (id), target);
    if (dist < bestDist)
      {
        bestDist = dist;
        best = id;
      }
  });
  m_intermediateCache.emplace (key, best);
  return best;
}

std::uint32_t
TransportState::InjectPrimary (NodeId source, std::int64_t primarySlot, std::mt19937_64 &rng)
{
  const auto peer = m_d->Peer (source);
  if (!peer)
    throw std::logic_error ("primary injection from an unpaired node");
  const CellGrid &pg = m_d->PrimaryGrid ();
  const CellPath path = HvPath (pg.CellOf (m_d->Position (source)), pg.CellOf (m_d->Position (*peer)), pg);

  PacketRecord rec;
  rec.id = static_cast<std::uint32_t> (m_records.size ());
  rec.tier = Tier::Primary;
  rec.source = source;
  rec.destination = *peer;
  rec.creationSlot = primarySlot;
  rec.creationPrimarySlot = primarySlot;
  rec.pathLength = static_cast<std::uint32_t> (path.Length ());
  ++m_primary.injected;

  if (path.Length () <= 2)
    {
      // Destination in the same or an adjacent cell: one primary transmission.
      rec.segments = 0;
      rec.deliverySlot = primarySlot + 1;
      rec.deliveryPrimarySlot = primarySlot;
      ++m_primary.delivered;
      m_records.push_back (rec);
      return rec.id;
    }

  const std::size_t relayCell = pg.IndexOf (path.cells[1]);
  const std::size_t interCell = pg.IndexOf (path.cells[path.Length () - 2]);
  const std::size_t sinkCell = pg.IndexOf (path.cells.back ());
  const std::uint32_t available = m_d->secondaryPerPrimaryCell[relayCell];
  const NodeId inter = available >= m_relayCount ? IntermediateDestination (interCell, sinkCell) : kNoNode;
  if (inter == kNoNode)
    {
      rec.dropped = true;
      rec.segments = m_relayCount;
      ++m_primary.dropped;
      m_records.push_back (rec);
      return rec.id;
    }

  SegmentBundle bundle = {};
  bundle.packet = rec.id;
  bundle.intermediate = inter;
  bundle.destination = *peer;
  bundle.sinkCell = sinkCell;
  bundle.readyGlobal = (primarySlot + 1) * kSlotsPerFrame;

  // Floyd's sampling of N distinct indices out of the cell population.
  std::set<std::uint32_t> chosen;
  for (std::uint32_t j = available - m_relayCount; j < available; ++j)
    {
      const std::uint32_t pick = std::uniform_int_distribution<std::uint32_t> (0, j) (rng);
      if (!chosen.insert (pick).second)
        chosen.insert (j);
    }
  bundle.relays.reserve (m_relayCount);
  const Point relayCenter = pg.Center (pg.CoordOf (relayCell));
  NodeId anchor = kNoNode;
  double anchorDist = std::numeric_limits<double>::infinity ();
  for (std::uint32_t j : chosen)
    {
      const NodeId id = m_d->SecondaryInPrimaryCell (relayCell, j);
      bundle.relays.push_back (id);
      const double dist = Distance (m_d->Position (id), relayCenter);
      if (dist < anchorDist)
        {
          anchorDist = dist;
          anchor = id;
        }
    }
  bundle.path = SecondaryRoute (m_d->secondary.CellOf (anchor), m_d->secondary.CellOf (inter));
  bundle.arrivalGlobal.assign (m_relayCount, -1);

  rec.segments = m_relayCount;
  rec.bundle = static_cast<std::int32_t> (m_bundles.size ());
  m_bundles.push_back (std::move (bundle));
  for (std::uint32_t s = 0; s < m_relayCount; ++s)
    m_staged.push_back (NewItem ({static_cast<std::uint32_t> (rec.bundle), s, 0, true}));
  ++m_primary.inFlight;
  m_records.push_back (rec);
  return rec.id;
}

void
TransportState::ReleasePendingSegments ()
{
  for (std::uint32_t id : m_staged)
    m_buckets[PathOf (m_items[id]).front ()].push_back (id);
  m_staged.clear ();
}

std::vector<CellCoord>
TransportState::PendingSinkCells () const
{
  // Oldest waiting packet first; ties by cell index.
  std::vector<std::pair<std::int64_t, std::size_t>> order;
  order.reserve (m_pending.size ());
  for (const auto &[cell, queue] : m_pending)
    {
      if (queue.empty ())
        continue;
      std::int64_t oldest = m_bundles[queue.front ()].completeGlobal;
      for (std::uint32_t b : queue)
        oldest = std::min (oldest, m_bundles[b].completeGlobal);
      order.emplace_back (oldest, cell);
    }
  std::sort (order.begin (), order.end ());
  std::vector<CellCoord> cells;
  cells.reserve (order.size ());
  for (const auto &entry : order)
    cells.push_back (m_d->PrimaryGrid ().CoordOf (entry.second));
  return cells;
}

void
TransportState::Arrive (std::uint32_t itemId, const SlotIndex &when)
{
  const Item item = m_items[itemId];
  m_freeItems.push_back (itemId);
  if (!item.isSegment)
    {
      PacketRecord &rec = m_records[item.ref];
      rec.deliverySlot = when.SecondaryClock () + 1;
      rec.deliveryPrimarySlot = when.primarySlot;
      SecondaryFlow &flow = m_flows[rec.flow];
      if (rec.creationSlot < flow.lastDeliveredCreation)
        ++m_inv.fifoViolations;
      flow.lastDeliveredCreation = rec.creationSlot;
      const auto hops = static_cast<std::int64_t> (flow.path.size ()) - 1;
      if (*rec.deliverySlot - rec.creationSlot < hops)
        ++m_inv.delayBoundViolations;
      ++m_secondary.delivered;
      --m_secondary.inFlight;
      return;
    }
  SegmentBundle &bundle = m_bundles[item.ref];
  bundle.arrivalGlobal[item.segment] = when.GlobalSecondarySlot () + 1;
  ++bundle.arrived;
  if (bundle.Complete ())
    {
      bundle.completeGlobal = when.GlobalSecondarySlot () + 1;
      bundle.relayClockSlots = RelaySubframeSlotsBetween (bundle.readyGlobal, bundle.completeGlobal);
      m_pending[bundle.sinkCell].push_back (item.ref);
    }
}

bool
TransportState::CheckConservation ()
{
  auto balanced = [] (const TierCounters &c) { return c.injected == c.delivered + c.inFlight + c.dropped; };
  const bool ok = balanced (m_primary) && balanced (m_secondary);
  if (!ok)
    ++m_inv.conservationViolations;
  return ok;
}

void
StepSecondarySlot (TransportState &state, const SlotSchedule &schedule)
{
  const Subframe sub = schedule.index.GetSubframe ();
  if (sub == Subframe::Delivery)
    return;
  const bool segments = sub == Subframe::PrimaryRelay;
  const CellGrid &sg = state.m_d->SecondaryGrid ();

  std::vector<std::pair<std::uint32_t, std::uint32_t>> moved; // item, next cell
  std::vector<std::pair<std::size_t, std::uint64_t>> sent;    // cell, flow key
  std::vector<std::uint32_t> keep;
  std::unordered_set<std::uint64_t> served;

  for (CellCoord cell : schedule.activeSecondaryCells)
    {
      const std::size_t idx = sg.IndexOf (cell);
      auto &bucket = state.m_buckets[idx];
      if (bucket.empty () || schedule.IsBlocked (idx))
        continue;
      keep.clear ();
      served.clear ();
      for (std::uint32_t id : bucket)
        {
          auto &item = state.m_items[id];
          if (item.isSegment != segments)
            {
              keep.push_back (id);
              continue;
            }
          const std::uint64_t key = state.FlowKey (item);
          if (!served.insert (key).second)
            {
              keep.push_back (id);
              continue;
            }
          sent.emplace_back (idx, key);
          ++state.m_inv.secondaryTransmissions;
          for (const auto &region : schedule.preservation)
            {
              if (region.secondaryCells.Contains (cell))
                ++state.m_inv.exclusionViolations;
            }
          const auto &path = state.PathOf (item);
          ++item.hop;
          if (path.size () == 1 || item.hop + 1 >= path.size ())
            state.Arrive (id, schedule.index);
          else
            moved.emplace_back (id, path[item.hop]);
        }
      bucket.swap (keep);
    }
  for (auto [id, next] : moved)
    state.m_buckets[next].push_back (id);

  std::sort (sent.begin (), sent.end ());
  if (std::adjacent_find (sent.begin (), sent.end ()) != sent.end ())
    ++state.m_inv.quotaViolations;
}

void
StepDeliverySubframe (TransportState &state, std::span<const Region> admitted, std::int64_t primarySlot)
{
  const CellGrid &pg = state.m_d->PrimaryGrid ();
  for (const auto &region : admitted)
    {
      auto it = state.m_pending.find (pg.IndexOf (region.center));
      if (it == state.m_pending.end ())
        continue;
      auto &queue = it->second;
      std::unordered_set<NodeId> served;
      std::vector<std::uint32_t> waiting;
      for (std::uint32_t b : queue)
        {
          SegmentBundle &bundle = state.m_bundles[b];
          if (!served.insert (bundle.destination).second)
            {
              waiting.push_back (b);
              continue;
            }
          if (!bundle.Complete ())
            ++state.m_inv.reassemblyViolations;
          PacketRecord &rec = state.m_records[bundle.packet];
          rec.deliverySlot = primarySlot + 1;
          rec.deliveryPrimarySlot = primarySlot;
          ++state.m_primary.delivered;
          --state.m_primary.inFlight;
        }
      queue.swap (waiting);
      if (queue.empty ())
        state.m_pending.erase (it);
    }
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

Simulation::Simulation (const Deployment &d, const RelayAssignment &relays, SimulationOptions options)
  : m_d (d),
    m_relays (relays),
    m_options (options),
    m_state (d, relays, RelayCount (d.config.M ())),
    m_primaryActivity (d.PrimaryGrid ()),
    m_secondaryActivity (d.SecondaryGrid ()),
    m_sourcesByPrimaryCell (d.PrimaryGrid ().CellCount ()),
    m_blocked (d.SecondaryGrid ().CellCount (), false),
    m_primaryRng (DeriveSeed (d.config.seed, Stream::SegmentRelays)),
    m_trafficRng (DeriveSeed (d.config.seed, Stream::SecondaryTraffic)),
    m_primaryTrafficRng (DeriveSeed (d.config.seed, Stream::PrimaryTraffic))
{
  for (const auto &pair : d.primaryPairs)
    m_sourcesByPrimaryCell[d.TierCellOf (pair.source)].push_back (pair.source);

  const std::size_t total = d.secondaryPairs.size ();
  const std::size_t take = std::min<std::size_t> (total, static_cast<std::size_t> (d.config.sampledFlows));
  std::vector<std::size_t> picks;
  picks.reserve (take);
  {
    std::vector<std::size_t> all (total);
    for (std::size_t i = 0; i < total; ++i)
      all[i] = i;
    std::mt19937_64 rng (DeriveSeed (d.config.seed, Stream::FlowSample));
    std::sample (all.begin (), all.end (), std::back_inserter (picks), take, rng);
  }
  const CellGrid &sg = d.SecondaryGrid ();
  for (std::size_t p : picks)
    {
      const auto &pair = d.secondaryPairs[p];
      const std::uint32_t flow = m_state.AddSecondaryFlow (pair.source, pair.destination);
      m_flowsBySlot[LocalSlot (sg.CoordOf (d.secondary.CellOf (pair.source)))].push_back (flow);
    }

  m_windowBegin = static_cast<std::int64_t> (d.config.warmupFrames) * kSlotsPerFrame;
  m_windowEnd = static_cast<std::int64_t> (d.config.frames) * kSlotsPerFrame;
}

bool
Simulation::TrackedOutstanding () const
{
  for (const auto &rec : m_state.Records ())
    {
      if (rec.creationPrimarySlot >= m_windowBegin && rec.creationPrimarySlot < m_windowEnd && !rec.dropped
          && !rec.deliverySlot)
        return true;
    }
  return false;
}

void
Simulation::Run ()
{
  const std::int64_t cap = m_windowEnd + static_cast<std::int64_t> (m_d.config.drainFrames) * kSlotsPerFrame;
  std::int64_t t = 0;
  for (; t < cap; ++t)
    {
      const bool injecting = t < m_windowEnd;
      if (!injecting && t % kSlotsPerFrame == 0 && !TrackedOutstanding ())
        break;
      RunPrimarySlot (t, injecting);
    }
  m_slotsRun = t;
}

void
Simulation::RunPrimarySlot (std::int64_t t, bool injecting)
{
  const CellGrid &pg = m_d.PrimaryGrid ();
  const CellGrid &sg = m_d.SecondaryGrid ();
  const int primarySlot = static_cast<int> (t % kSlotsPerFrame);
  const std::int64_t auditEnd = m_d.config.auditFrames == 0
                                   ? m_windowEnd
                                   : std::min (m_windowEnd, m_windowBegin + static_cast<std::int64_t> (
                                                                               m_d.config.auditFrames)
                                                                               * kSlotsPerFrame);
  const bool auditing = m_options.recordAudit && t >= m_windowBegin && t < auditEnd;

  AuditSlot audit;
  audit.primarySlot = t;
  std::vector<CellCoord> txCells;
  if (injecting)
    {
      for (CellCoord cell : m_primaryActivity.Active (primarySlot))
        {
          const auto &sources = m_sourcesByPrimaryCell[pg.IndexOf (cell)];
          if (sources.empty ())
            continue;
          std::vector<AuditSlot::Link> links;
          std::bernoulli_distribution send (m_d.config.primaryLoad);
          bool sent = false;
          for (NodeId src : sources)
            {
              if (!send (m_primaryTrafficRng))
                continue;
              sent = true;
              const std::uint32_t id = m_state.InjectPrimary (src, t, m_primaryRng);
              if (!auditing)
                continue;
              const auto &rec = m_state.Records ()[id];
              const CellPath path = HvPath (pg.CellOf (m_d.Position (src)),
                                            pg.CellOf (m_d.Position (rec.destination)), pg);
              const NodeId rx = path.Length () <= 2 ? rec.destination
                                                    : m_relays.primaryCellRelay[pg.IndexOf (path.cells[1])];
              if (rx != kNoNode && rx != src)
                links.push_back ({src, rx});
            }
          // Only cells that actually transmit spawn a preservation region.
          if (!sent)
            continue;
          txCells.push_back (cell);
          if (auditing)
            audit.primaryCells.push_back (std::move (links));
        }
    }

  const std::vector<Region> preservation = PreservationRegions (txCells, pg, sg);
  std::fill (m_blocked.begin (), m_blocked.end (), false);
  for (const auto &region : preservation)
    {
      const CellRect &r = region.secondaryCells;
      for (int row = r.row0; row <= r.row1; ++row)
        for (int col = r.col0; col <= r.col1; ++col)
          m_blocked[sg.IndexOf ({col, row})] = true;
    }

  const SlotIndex base{t, 0};
  const Subframe sub = base.GetSubframe ();
  std::vector<Region> admitted;
  if (sub != Subframe::Delivery)
    {
      std::bernoulli_distribution inject (m_d.config.secondaryLoad);
      for (int s = 0; s < kSlotsPerFrame; ++s)
        {
          const SlotIndex when{t, s};
          if (sub == Subframe::IntraSecondary && injecting)
            {
              for (std::uint32_t flow : m_flowsBySlot[s])
                {
                  if (inject (m_trafficRng))
                    m_state.InjectSecondary (flow, when);
                }
            }
          SlotSchedule schedule;
          schedule.index = when;
          schedule.activePrimaryCells = txCells;
          schedule.activeSecondaryCells = m_secondaryActivity.Active (s);
          schedule.preservation = preservation;
          schedule.blocked = &m_blocked;
          StepSecondarySlot (m_state, schedule);
        }
    }
  else
    {
      const auto sinks = m_state.PendingSinkCells ();
      admitted = AdmitCollectionRegions (sinks, preservation, pg, sg);
      if (auditing)
        {
          // Deliveries about to happen, in TDMA order per region.
          for (const auto &region : admitted)
            {
              std::vector<AuditSlot::Link> links;
              std::unordered_set<NodeId> served;
              for (const auto &bundle : m_state.Bundles ())
                {
                  if (bundle.sinkCell == pg.IndexOf (region.center) && bundle.Complete ()
                      && !m_state.Records ()[bundle.packet].deliverySlot && served.insert (bundle.destination).second)
                    links.push_back ({bundle.intermediate, bundle.destination});
                }
              audit.deliveries.push_back (std::move (links));
            }
        }
      StepDeliverySubframe (m_state, admitted, t);
    }
  m_state.ReleasePendingSegments ();
  m_state.CheckConservation ();

  if (auditing)
    {
      audit.preservation = preservation;
      m_audit.push_back (std::move (audit));
    }
}

RawMetrics
Simulation::Measure () const
{
  RawMetrics m;
  const auto &records = m_state.Records ();
  const auto &bundles = m_state.Bundles ();
  const double windowSlots = static_cast<double> (m_windowEnd - m_windowBegin);
  auto inWindow = [this] (std::int64_t t) { return t >= m_windowBegin && t < m_windowEnd; };

  // Fluid packet sizes. Primary sources of a cell share its slot in turn;
  // a secondary path carries packets sized by its most loaded cell.
  std::vector<double> primarySize (m_d.PrimaryGrid ().CellCount (), 0.0);
  for (std::size_t c = 0; c < primarySize.size (); ++c)
    primarySize[c] = m_sourcesByPrimaryCell[c].empty () ? 0.0 : 1.0 / m_sourcesByPrimaryCell[c].size ();

  const CellGrid &sg = m_d.SecondaryGrid ();
  std::vector<CellPair> cellPairs;
  cellPairs.reserve (m_d.secondaryPairs.size ());
  for (const auto &pair : m_d.secondaryPairs)
    cellPairs.push_back ({sg.CoordOf (m_d.secondary.CellOf (pair.source)),
                          sg.CoordOf (m_d.secondary.CellOf (pair.destination))});
  const auto loads = PathsThroughCell (cellPairs, sg);
  std::vector<double> flowSize;
  flowSize.reserve (m_state.Flows ().size ());
  for (const auto &flow : m_state.Flows ())
    {
      std::uint32_t bottleneck = 1;
      for (std::uint32_t c : flow.path)
        bottleneck = std::max (bottleneck, loads[c]);
      flowSize.push_back (1.0 / bottleneck);
    }

  double deliveredSizeP = 0.0;
  double deliveredSizeS = 0.0;
  double injectedSizeP = 0.0;
  double injectedSizeS = 0.0;
  std::uint64_t injectedS = 0;
  double sumDp = 0.0;
  double sumDs = 0.0;
  double sumC = 0.0;
  double sumTransit = 0.0;
  std::uint64_t injectedP = 0;
  std::uint64_t droppedP = 0;
  for (const auto &rec : records)
    {
      const bool delivered = rec.deliverySlot.has_value ();
      if (rec.tier == Tier::Primary)
        {
          const double size = primarySize[m_d.TierCellOf (rec.source)];
          if (delivered && inWindow (rec.deliveryPrimarySlot))
            {
              ++m.primaryDeliveredInWindow;
              deliveredSizeP += size;
            }
          if (!inWindow (rec.creationPrimarySlot))
            continue;
          ++injectedP;
          injectedSizeP += size;
          droppedP += rec.dropped ? 1 : 0;
          if (rec.dropped)
            continue;
          if (!delivered)
            {
              m.undrained = true;
              continue;
            }
          const double delay = static_cast<double> (*rec.deliverySlot - rec.creationSlot);
          sumDp += delay;
          ++m.primaryDelaySamples;
          if (rec.bundle >= 0)
            {
              const auto &b = bundles[rec.bundle];
              ++m.relayedPackets;
              sumTransit += static_cast<double> (b.relayClockSlots);
              sumC += delay - 3.0 / 64.0 * static_cast<double> (b.relayClockSlots);
              ++m.bundlesMeasured;
              const std::int64_t gap = b.SynchronizationGap ();
              m.maxSegmentGap = std::max (m.maxSegmentGap, gap);
              if (gap <= kSlotsPerFrame)
                ++m.bundlesWithinFrameGap;
            }
        }
      else
        {
          if (delivered && inWindow (rec.deliveryPrimarySlot))
            {
              ++m.secondaryDeliveredInWindow;
              deliveredSizeS += flowSize[rec.flow];
            }
          if (!inWindow (rec.creationPrimarySlot))
            continue;
          injectedSizeS += flowSize[rec.flow];
          ++injectedS;
          if (!delivered)
            {
              m.undrained = true;
              continue;
            }
          sumDs += static_cast<double> (*rec.deliverySlot - rec.creationSlot);
          ++m.secondaryDelaySamples;
        }
    }

  const double primaryPairs = static_cast<double> (m_d.primaryPairs.size ());
  m.lambdaP = primaryPairs == 0 ? 0.0 : deliveredSizeP / windowSlots / primaryPairs;
  m.primaryPacketSize = injectedP == 0 ? 0.0 : injectedSizeP / injectedP;

  // Secondary-tier clock ticks inside the window: 64 per intra-secondary subframe.
  std::int64_t intraSubframes = 0;
  for (std::int64_t t = m_windowBegin; t < m_windowEnd; ++t)
    intraSubframes += t % kSubframes == static_cast<int> (Subframe::IntraSecondary) ? 1 : 0;
  const double clockWindow = static_cast<double> (intraSubframes * kSlotsPerFrame);
  const double flows = static_cast<double> (m_state.Flows ().size ());
  m.lambdaS = flows == 0 ? 0.0 : deliveredSizeS / clockWindow / flows;
  m.secondaryPacketSize = injectedS == 0 ? 0.0 : injectedSizeS / injectedS;

  m.delayUndefinedP = m.primaryDelaySamples == 0;
  m.delayUndefinedS = m.secondaryDelaySamples == 0;
  m.delayP = m.delayUndefinedP ? 0.0 : sumDp / m.primaryDelaySamples;
  m.delayS = m.delayUndefinedS ? 0.0 : sumDs / m.secondaryDelaySamples;
  m.meanOverheadC = m.relayedPackets == 0 ? 0.0 : sumC / m.relayedPackets;
  m.meanSegmentTransit = m.relayedPackets == 0 ? 0.0 : sumTransit / m.relayedPackets;
  m.dropRate = injectedP == 0 ? 0.0 : static_cast<double> (droppedP) / injectedP;
  m.lowConfidence = m.primaryDeliveredInWindow < 30 || m.secondaryDeliveredInWindow < 30;
  return m;
}

} // namespace tiernet
