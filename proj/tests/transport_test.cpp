#include "helpers.hpp"

#include "tiernet/transport.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

using namespace tiernet;
using tiernet::test::SmallConfig;

namespace {

struct Fixture
{
  Deployment d;
  RelayAssignment relays;
  std::vector<CellCoord> allSecondary;

  explicit Fixture (double n = 256, std::uint64_t seed = 4)
    : d (BuildDeployment (SmallConfig (n, seed))),
      relays (SelectRelays (d, seed))
  {
    const CellGrid &sg = d.SecondaryGrid ();
    for (std::size_t c = 0; c < sg.CellCount (); ++c)
      allSecondary.push_back (sg.CoordOf (c));
  }

  NodeId
  NodeIn (CellCoord secondaryCell, std::uint32_t j = 0) const
  {
    const IdRange r = d.secondary.CellRange (d.SecondaryGrid ().IndexOf (secondaryCell));
    REQUIRE (r.size () > j);
    return r.first + j;
  }

  CellPath
  PrimaryPath (NodeId source) const
  {
    const CellGrid &pg = d.PrimaryGrid ();
    return HvPath (pg.CellOf (d.Position (source)), pg.CellOf (d.Position (*d.Peer (source))), pg);
  }

  NodeId
  SourceWithPathAtLeast (std::size_t length) const
  {
    for (const auto &p : d.primaryPairs)
      if (PrimaryPath (p.source).Length () >= length)
        return p.source;
    FAIL ("no primary pair with a long enough path");
    return kNoNode;
  }

  NodeId
  SourceWithPathAtMost (std::size_t length) const
  {
    for (const auto &p : d.primaryPairs)
      if (PrimaryPath (p.source).Length () <= length)
        return p.source;
    FAIL ("no primary pair with a short enough path");
    return kNoNode;
  }
};

SlotSchedule
Everywhere (const Fixture &f, SlotIndex when, const std::vector<bool> *blocked = nullptr)
{
  SlotSchedule s;
  s.index = when;
  s.activeSecondaryCells = f.allSecondary;
  s.blocked = blocked;
  return s;
}

// Drives primary relay and delivery subframes with every cell active and no
// preservation regions until the record completes; returns the slot count.
std::int64_t
DriveUntilDelivered (const Fixture &f, TransportState &state, std::uint32_t record, std::int64_t from,
                     std::int64_t limit = 600)
{
  const CellGrid &pg = f.d.PrimaryGrid ();
  const CellGrid &sg = f.d.SecondaryGrid ();
  for (std::int64_t t = from; t < from + limit; ++t)
    {
      const SlotIndex base{t, 0};
      if (base.GetSubframe () == Subframe::Delivery)
        {
          const auto sinks = state.PendingSinkCells ();
          const auto admitted = AdmitCollectionRegions (sinks, {}, pg, sg);
          StepDeliverySubframe (state, admitted, t);
        }
      else
        for (int s = 0; s < kSlotsPerFrame; ++s)
          StepSecondarySlot (state, Everywhere (f, {t, s}));
      state.ReleasePendingSegments ();
      if (state.Records ()[record].deliverySlot)
        return t;
    }
  return -1;
}

} // namespace

TEST_SUITE ("fluid_transport")
{
  TEST_CASE ("relay count examples")
  {
    CHECK (RelayCount (1e4) == 32);
    CHECK (RelayCount (std::exp (1.0)) == 1);
    // sqrt(1e8 / ln 1e8) = 2329.95; rounding ln 1e8 to 18.42 would give 2330.
    CHECK (RelayCount (1e8) == 2329);
    CHECK (RelayCount (1e8) == static_cast<std::uint32_t> (std::sqrt (1e8 / std::log (1e8))));
    CHECK (RelayCount (1.0) == 1);
    const double ms[] = {4096, 16384, 65536, 262144, 1048576};
    const std::uint32_t expected[] = {22, 41, 76, 144, 275};
    for (int i = 0; i < 5; ++i)
      CHECK (RelayCount (ms[i]) == expected[i]);
  }

  TEST_CASE ("relay subframe slot counting")
  {
    CHECK (RelaySubframeSlotsBetween (0, 64) == 0);
    CHECK (RelaySubframeSlotsBetween (64, 128) == 64);
    CHECK (RelaySubframeSlotsBetween (70, 100) == 30);
    CHECK (RelaySubframeSlotsBetween (0, 64 * 6) == 128);
    CHECK (RelaySubframeSlotsBetween (100, 100) == 0);
  }

  TEST_CASE ("an empty network stays empty")
  {
    const Fixture f;
    TransportState state (f.d, f.relays, 4);
    for (int s = 0; s < kSlotsPerFrame; ++s)
      StepSecondarySlot (state, Everywhere (f, {0, s}));
    StepDeliverySubframe (state, {}, 2);
    CHECK (state.Records ().empty ());
    CHECK (state.Invariants ().secondaryTransmissions == 0);
    CHECK (state.CheckConservation ());
  }

  TEST_CASE ("a packet over L cells arrives after L - 1 forwarding events")
  {
    const Fixture f;
    TransportState state (f.d, f.relays, 4);
    const std::uint32_t flow = state.AddSecondaryFlow (f.NodeIn ({0, 0}), f.NodeIn ({5, 3}));
    REQUIRE (state.Flows ()[flow].path.size () == 9);
    CHECK (state.Flows ()[flow].hvLength == 9);
    const std::uint32_t id = state.InjectSecondary (flow, {0, 0});
    int events = 0;
    for (int s = 0; s < kSlotsPerFrame && !state.Records ()[id].deliverySlot; ++s)
      {
        StepSecondarySlot (state, Everywhere (f, {0, s}));
        ++events;
      }
    CHECK (events == 8);
    CHECK (*state.Records ()[id].deliverySlot - state.Records ()[id].creationSlot == 8);
    CHECK (state.Counters (Tier::Secondary).delivered == 1);
    CHECK (state.Invariants ().AllClear ());
  }

  TEST_CASE ("a same-cell packet takes one slot")
  {
    const Fixture f;
    TransportState state (f.d, f.relays, 4);
    const std::uint32_t flow = state.AddSecondaryFlow (f.NodeIn ({3, 3}, 0), f.NodeIn ({3, 3}, 1));
    const std::uint32_t id = state.InjectSecondary (flow, {0, 7});
    StepSecondarySlot (state, Everywhere (f, {0, 7}));
    REQUIRE (state.Records ()[id].deliverySlot);
    CHECK (*state.Records ()[id].deliverySlot == 8);
  }

  TEST_CASE ("blocked, inactive and off-subframe cells hold their queues")
  {
    const Fixture f;
    TransportState state (f.d, f.relays, 4);
    const std::uint32_t flow = state.AddSecondaryFlow (f.NodeIn ({0, 0}), f.NodeIn ({4, 0}));
    state.InjectSecondary (flow, {0, 0});
    const std::size_t src = f.d.SecondaryGrid ().IndexOf ({0, 0});

    const std::vector<bool> blocked (f.d.SecondaryGrid ().CellCount (), true);
    for (int s = 0; s < kSlotsPerFrame; ++s)
      StepSecondarySlot (state, Everywhere (f, {0, s}, &blocked));
    CHECK (state.ItemsInCell (src) == 1);

    SlotSchedule idle = Everywhere (f, {0, 0});
    idle.activeSecondaryCells = {};
    StepSecondarySlot (state, idle);
    CHECK (state.ItemsInCell (src) == 1);

    StepSecondarySlot (state, Everywhere (f, {1, 0}));
    StepSecondarySlot (state, Everywhere (f, {2, 0}));
    CHECK (state.ItemsInCell (src) == 1);

    StepSecondarySlot (state, Everywhere (f, {3, 0}));
    CHECK (state.ItemsInCell (src) == 0);
    CHECK (state.Invariants ().secondaryTransmissions == 1);
  }

  TEST_CASE ("one packet per flow per cell and slot")
  {
    const Fixture f;
    TransportState state (f.d, f.relays, 4);
    const std::uint32_t a = state.AddSecondaryFlow (f.NodeIn ({0, 0}, 0), f.NodeIn ({3, 0}));
    const std::uint32_t b = state.AddSecondaryFlow (f.NodeIn ({0, 0}, 1), f.NodeIn ({0, 3}));
    for (int i = 0; i < 3; ++i)
      state.InjectSecondary (a, {0, 0});
    state.InjectSecondary (b, {0, 0});
    const std::size_t src = f.d.SecondaryGrid ().IndexOf ({0, 0});
    REQUIRE (state.ItemsInCell (src) == 4);
    StepSecondarySlot (state, Everywhere (f, {0, 0}));
    CHECK (state.ItemsInCell (src) == 2);
    CHECK (state.Invariants ().quotaViolations == 0);
  }

  TEST_CASE ("packets of a flow arrive in creation order")
  {
    const Fixture f;
    TransportState state (f.d, f.relays, 4);
    const std::uint32_t flow = state.AddSecondaryFlow (f.NodeIn ({1, 1}), f.NodeIn ({6, 9}));
    std::vector<std::uint32_t> ids;
    for (int s = 0; s < 5; ++s)
      {
        ids.push_back (state.InjectSecondary (flow, {0, s}));
        StepSecondarySlot (state, Everywhere (f, {0, s}));
      }
    for (int s = 5; s < kSlotsPerFrame; ++s)
      StepSecondarySlot (state, Everywhere (f, {0, s}));
    for (std::size_t i = 1; i < ids.size (); ++i)
      {
        REQUIRE (state.Records ()[ids[i]].deliverySlot);
        CHECK (*state.Records ()[ids[i]].deliverySlot > *state.Records ()[ids[i - 1]].deliverySlot);
      }
    CHECK (state.Invariants ().fifoViolations == 0);
    CHECK (state.CheckConservation ());
  }

  TEST_CASE ("short primary paths are delivered directly")
  {
    const Fixture f;
    TransportState state (f.d, f.relays, RelayCount (f.d.config.M ()));
    std::mt19937_64 rng (1);
    const NodeId src = f.SourceWithPathAtMost (2);
    const std::uint32_t id = state.InjectPrimary (src, 10, rng);
    const PacketRecord &rec = state.Records ()[id];
    REQUIRE (rec.deliverySlot);
    CHECK (*rec.deliverySlot - rec.creationSlot == 1);
    CHECK (rec.segments == 0);
    CHECK (state.Bundles ().empty ());
  }

  TEST_CASE ("a relayed primary packet broadcasts to N distinct relays")
  {
    const Fixture f;
    const std::uint32_t n = RelayCount (f.d.config.M ());
    TransportState state (f.d, f.relays, n);
    std::mt19937_64 rng (1);
    const NodeId src = f.SourceWithPathAtLeast (3);
    const CellPath path = f.PrimaryPath (src);
    const CellGrid &pg = f.d.PrimaryGrid ();
    const std::uint32_t id = state.InjectPrimary (src, 0, rng);
    const PacketRecord &rec = state.Records ()[id];
    REQUIRE (rec.bundle == 0);
    CHECK (rec.segments == n);
    CHECK_FALSE (rec.deliverySlot);

    const SegmentBundle &b = state.Bundles ()[0];
    REQUIRE (b.relays.size () == n);
    std::set<NodeId> unique (b.relays.begin (), b.relays.end ());
    CHECK (unique.size () == n);
    for (NodeId r : b.relays)
      {
        CHECK_FALSE (f.d.IsPrimary (r));
        CHECK (f.d.PrimaryCellOf (r) == pg.IndexOf (path.cells[1]));
      }
    CHECK (f.d.PrimaryCellOf (b.intermediate) == pg.IndexOf (path.cells[path.Length () - 2]));
    CHECK (b.sinkCell == pg.IndexOf (path.cells.back ()));
    CHECK (b.destination == *f.d.Peer (src));

    CHECK (state.ItemsInCell (b.path.front ()) == 0);
    state.ReleasePendingSegments ();
    CHECK (state.ItemsInCell (b.path.front ()) == n);
    CHECK (state.Counters (Tier::Primary).inFlight == 1);
    CHECK (state.CheckConservation ());
  }

  TEST_CASE ("segments move in lockstep and reassemble before delivery")
  {
    const Fixture f;
    TransportState state (f.d, f.relays, RelayCount (f.d.config.M ()));
    std::mt19937_64 rng (2);
    const std::uint32_t id = state.InjectPrimary (f.SourceWithPathAtLeast (3), 0, rng);
    state.ReleasePendingSegments ();
    const SegmentBundle &b = state.Bundles ()[0];
    const auto hops = static_cast<std::int64_t> (b.path.size ()) - 1;

    // Intra-secondary and delivery subframes do not move segments.
    for (int s = 0; s < kSlotsPerFrame; ++s)
      StepSecondarySlot (state, Everywhere (f, {0, s}));
    CHECK (b.arrived == 0);

    int events = 0;
    for (int s = 0; s < kSlotsPerFrame && !b.Complete (); ++s, ++events)
      StepSecondarySlot (state, Everywhere (f, {1, s}));
    if (hops <= kSlotsPerFrame)
      {
        CHECK (b.Complete ());
        CHECK (events == std::max<std::int64_t> (hops, 1));
        CHECK (b.SynchronizationGap () == 0);
        CHECK (b.relayClockSlots == events);
        const auto sinks = state.PendingSinkCells ();
        REQUIRE (sinks.size () == 1);
        CHECK (f.d.PrimaryGrid ().IndexOf (sinks[0]) == b.sinkCell);
      }

    CHECK_FALSE (state.Records ()[id].deliverySlot);
    StepDeliverySubframe (state, {}, 2);
    CHECK_FALSE (state.Records ()[id].deliverySlot);
    CHECK (state.Invariants ().reassemblyViolations == 0);
  }

  TEST_CASE ("single packet trace decomposes into access, transit and delivery wait")
  {
    const Fixture f;
    for (int trial = 0; trial < 5; ++trial)
      {
        TransportState state (f.d, f.relays, RelayCount (f.d.config.M ()));
        std::mt19937_64 rng (trial);
        const std::uint32_t id = state.InjectPrimary (f.SourceWithPathAtLeast (3), 0, rng);
        state.ReleasePendingSegments ();
        const std::int64_t done = DriveUntilDelivered (f, state, id, 1);
        REQUIRE (done > 0);
        const SegmentBundle &b = state.Bundles ()[state.Records ()[id].bundle];
        const std::int64_t hops = std::max<std::int64_t> (1, static_cast<std::int64_t> (b.path.size ()) - 1);
        const std::int64_t relaySubframes = (hops + kSlotsPerFrame - 1) / kSlotsPerFrame;
        const std::int64_t completion = 1 + 3 * (relaySubframes - 1);
        CHECK (done == completion + 1);
        const double dp = static_cast<double> (*state.Records ()[id].deliverySlot);
        CHECK (dp == static_cast<double> (completion + 2));
        CHECK (b.relayClockSlots == hops);
        const double overhead = dp - 3.0 / 64.0 * static_cast<double> (b.relayClockSlots);
        CHECK (overhead > 0.0);
        CHECK (state.Counters (Tier::Primary).delivered == 1);
        CHECK (state.CheckConservation ());
      }
  }

  TEST_CASE ("one delivery per destination per delivery subframe")
  {
    const Fixture f;
    TransportState state (f.d, f.relays, RelayCount (f.d.config.M ()));
    std::mt19937_64 rng (3);
    const NodeId src = f.SourceWithPathAtLeast (3);
    const std::uint32_t first = state.InjectPrimary (src, 0, rng);
    const std::uint32_t second = state.InjectPrimary (src, 0, rng);
    state.ReleasePendingSegments ();
    for (int s = 0; s < kSlotsPerFrame; ++s)
      StepSecondarySlot (state, Everywhere (f, {1, s}));
    const auto sinks = state.PendingSinkCells ();
    REQUIRE (sinks.size () == 1);
    const auto admitted = AdmitCollectionRegions (sinks, {}, f.d.PrimaryGrid (), f.d.SecondaryGrid ());
    StepDeliverySubframe (state, admitted, 2);
    CHECK (state.Records ()[first].deliverySlot.has_value () != state.Records ()[second].deliverySlot.has_value ());
    CHECK (state.Counters (Tier::Primary).delivered == 1);
    StepDeliverySubframe (state, admitted, 5);
    CHECK (state.Records ()[first].deliverySlot);
    CHECK (state.Records ()[second].deliverySlot);
    CHECK (state.PendingSinkCells ().empty ());
    CHECK (state.CheckConservation ());
  }

  TEST_CASE ("distinct destinations in one sink cell are served together")
  {
    const Fixture f;
    const CellGrid &pg = f.d.PrimaryGrid ();
    std::map<std::size_t, std::vector<NodeId>> bySink;
    for (const auto &p : f.d.primaryPairs)
      if (f.PrimaryPath (p.source).Length () >= 3)
        bySink[pg.IndexOf (f.PrimaryPath (p.source).cells.back ())].push_back (p.source);
    auto it = std::find_if (bySink.begin (), bySink.end (), [] (const auto &e) { return e.second.size () >= 2; });
    REQUIRE (it != bySink.end ());

    TransportState state (f.d, f.relays, RelayCount (f.d.config.M ()));
    std::mt19937_64 rng (4);
    const std::uint32_t a = state.InjectPrimary (it->second[0], 0, rng);
    const std::uint32_t b = state.InjectPrimary (it->second[1], 0, rng);
    state.ReleasePendingSegments ();
    for (int t : {1, 4, 7})
      for (int s = 0; s < kSlotsPerFrame; ++s)
        StepSecondarySlot (state, Everywhere (f, {t, s}));
    const auto admitted = AdmitCollectionRegions (state.PendingSinkCells (), {}, pg, f.d.SecondaryGrid ());
    StepDeliverySubframe (state, admitted, 8);
    CHECK (state.Records ()[a].deliverySlot);
    CHECK (state.Records ()[b].deliverySlot);
  }

  TEST_CASE ("a relay cell short of N secondary nodes drops the packet")
  {
    const Fixture f;
    TransportState state (f.d, f.relays, 1u << 24);
    std::mt19937_64 rng (5);
    const std::uint32_t id = state.InjectPrimary (f.SourceWithPathAtLeast (3), 0, rng);
    CHECK (state.Records ()[id].dropped);
    CHECK (state.Counters (Tier::Primary).dropped == 1);
    CHECK (state.Counters (Tier::Primary).inFlight == 0);
    CHECK (state.CheckConservation ());
  }

  TEST_CASE ("a full simulation keeps every invariant")
  {
    Deployment d = BuildDeployment (SmallConfig (128, 6));
    const RelayAssignment relays = SelectRelays (d, 6);
    Simulation sim (d, relays);
    sim.Run ();
    const TransportState &state = sim.State ();
    CHECK (state.Invariants ().AllClear ());
    for (Tier t : {Tier::Primary, Tier::Secondary})
      {
        const TierCounters &c = state.Counters (t);
        CHECK (c.injected == c.delivered + c.inFlight + c.dropped);
        CHECK (c.injected > 0);
      }
    for (const auto &rec : state.Records ())
      {
        if (!rec.deliverySlot)
          continue;
        CHECK (*rec.deliverySlot - rec.creationSlot >= 1);
        if (rec.tier == Tier::Secondary)
          CHECK (*rec.deliverySlot - rec.creationSlot
                 >= static_cast<std::int64_t> (state.Flows ()[rec.flow].path.size ()) - 1);
      }
    for (const auto &b : state.Bundles ())
      if (b.Complete ())
        CHECK (b.SynchronizationGap () <= kSlotsPerFrame);
    const RawMetrics m = sim.Measure ();
    CHECK (m.lambdaP > 0.0);
    CHECK (m.lambdaS > 0.0);
    CHECK (m.delayP >= 1.0);
    CHECK (m.delayS >= 1.0);
    CHECK (m.meanOverheadC > 0.0);
  }
}
