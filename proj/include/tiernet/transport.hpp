#pragma once

#include "tiernet/geometry.hpp"
#include "tiernet/routing.hpp"
#include "tiernet/schedule.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace tiernet {

/// N = max(1, floor(sqrt(m / ln m))).
std::uint32_t RelayCount (double m);

struct PacketRecord
{
  std::uint32_t id = 0;
  Tier tier = Tier::Primary;
  NodeId source = kNoNode;
  NodeId destination = kNoNode;
  /// Primary packets: primary slots. Secondary packets: secondary-tier clock.
  std::int64_t creationSlot = 0;
  std::optional<std::int64_t> deliverySlot;
  std::int64_t creationPrimarySlot = 0;  ///< wall clock, both tiers
  std::int64_t deliveryPrimarySlot = -1; ///< slot in which delivery completed
  std::uint32_t pathLength = 0;          ///< cells on the tier's routing path
  std::uint32_t segments = 1;
  std::int32_t bundle = -1;
  std::uint32_t flow = 0;
  bool dropped = false;
};

/// N segments of one primary packet. Every segment is its own flow but all
/// share the same secondary cell path.
struct SegmentBundle
{
  std::uint32_t packet = 0;
  std::vector<NodeId> relays;
  NodeId intermediate = kNoNode;
  NodeId destination = kNoNode;
  std::size_t sinkCell = 0;               ///< primary grid
  std::vector<std::uint32_t> path;        ///< secondary cell indices
  std::vector<std::int64_t> arrivalGlobal; ///< per segment, -1 until arrival
  std::uint32_t arrived = 0;
  std::int64_t readyGlobal = 0;    ///< secondary wall slot when segments can first move
  std::int64_t completeGlobal = -1;
  std::int64_t relayClockSlots = 0; ///< primary-relay subframe slots spent in transit

  bool Complete () const { return arrived == relays.size (); }
  std::int64_t SynchronizationGap () const;
};

/// A sampled secondary S-D flow.
struct SecondaryFlow
{
  NodeId source = kNoNode;
  NodeId destination = kNoNode;
  std::vector<std::uint32_t> path; ///< secondary cell indices, empty cells skipped
  std::uint32_t hvLength = 0;      ///< full HV length in cells
  std::int64_t lastDeliveredCreation = -1;
};

struct InvariantCounters
{
  std::uint64_t exclusionViolations = 0;
  std::uint64_t quotaViolations = 0;
  std::uint64_t fifoViolations = 0;
  std::uint64_t conservationViolations = 0;
  std::uint64_t reassemblyViolations = 0;
  std::uint64_t delayBoundViolations = 0;
  std::uint64_t secondaryTransmissions = 0;
  std::uint64_t auditedSlots = 0;

  bool AllClear () const
  {
    return exclusionViolations == 0 && quotaViolations == 0 && fifoViolations == 0 && conservationViolations == 0
           && reassemblyViolations == 0 && delayBoundViolations == 0;
  }
};

struct TierCounters
{
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t inFlight = 0;
};

/// Mutable packet state of one run. Built over an immutable Deployment.
class TransportState
{
public:
  TransportState (const Deployment &d, const RelayAssignment &relays, std::uint32_t relayCount);

  const Deployment &GetDeployment () const { return *m_d; }
  std::uint32_t RelayCountN () const { return m_relayCount; }

  /// Registers a secondary flow for packet-level tracking; returns its index.
  std::uint32_t AddSecondaryFlow (NodeId source, NodeId destination);
  /// Enqueues one new secondary packet at its source cell.
  std::uint32_t InjectSecondary (std::uint32_t flow, const SlotIndex &when);
  /// Creates a primary packet departing at primarySlot. Direct deliveries
  /// (HV length <= 2) complete in the same slot; others become bundles whose
  /// segments join the secondary grid after the slot ends.
  std::uint32_t InjectPrimary (NodeId source, std::int64_t primarySlot, std::mt19937_64 &rng);
  /// Places segments created during a primary slot onto the secondary grid.
  void ReleasePendingSegments ();

  /// Sink cells (primary grid) with a reassembled packet waiting, oldest first.
  std::vector<CellCoord> PendingSinkCells () const;

  const std::vector<PacketRecord> &Records () const { return m_records; }
  const std::vector<SegmentBundle> &Bundles () const { return m_bundles; }
  const std::vector<SecondaryFlow> &Flows () const { return m_flows; }
  const TierCounters &Counters (Tier t) const { return t == Tier::Primary ? m_primary : m_secondary; }
  const InvariantCounters &Invariants () const { return m_inv; }
  InvariantCounters &MutableInvariants () { return m_inv; }
  std::size_t ItemsInCell (std::size_t secondaryCell) const { return m_buckets[secondaryCell].size (); }

  /// Checks injected = delivered + in-flight + dropped for both tiers.
  bool CheckConservation ();

  friend void StepSecondarySlot (TransportState &state, const SlotSchedule &schedule);
  friend void StepDeliverySubframe (TransportState &state, std::span<const Region> admitted,
                                    std::int64_t primarySlot);

private:
  struct Item
  {
    std::uint32_t ref = 0;     // record (secondary packet) or bundle index
    std::uint32_t segment = 0; // segment index inside the bundle
    std::uint32_t hop = 0;     // index into the path
    bool isSegment = false;
  };

  std::uint64_t FlowKey (const Item &item) const;
  const std::vector<std::uint32_t> &PathOf (const Item &item) const;
  std::uint32_t NewItem (const Item &item);
  void Arrive (std::uint32_t itemId, const SlotIndex &when);
  NodeId IntermediateDestination (std::size_t relayPrimaryCell, std::size_t sinkCell);
  std::vector<std::uint32_t> SecondaryRoute (std::size_t fromCell, std::size_t toCell) const;

  const Deployment *m_d;
  const RelayAssignment *m_relays;
  std::uint32_t m_relayCount;
  std::vector<PacketRecord> m_records;
  std::vector<SegmentBundle> m_bundles;
  std::vector<SecondaryFlow> m_flows;
  std::vector<Item> m_items;
  std::vector<std::uint32_t> m_freeItems;
  std::vector<std::vector<std::uint32_t>> m_buckets; // per secondary cell, FIFO order
  std::vector<std::uint32_t> m_staged;               // segments awaiting release
  std::map<std::size_t, std::vector<std::uint32_t>> m_pending; // sink cell -> complete bundles
  std::map<std::pair<std::size_t, std::size_t>, NodeId> m_intermediateCache;
  TierCounters m_primary;
  TierCounters m_secondary;
  InvariantCounters m_inv;
};

/// Subframes 1 and 2: each active, unblocked secondary cell forwards the head
/// of every flow queued in it (secondary packets in subframe 1, primary
/// segments in subframe 2). Blocked or inactive cells hold their queues.
void StepSecondarySlot (TransportState &state, const SlotSchedule &schedule);

/// Subframe 3: in each admitted collection region, every destination node in
/// the sink cell receives one reassembled packet.
void StepDeliverySubframe (TransportState &state, std::span<const Region> admitted, std::int64_t primarySlot);

/// Concurrent transmissions of one audited primary slot.
struct AuditSlot
{
  std::int64_t primarySlot = 0;
  struct Link
  {
    NodeId tx = kNoNode;
    NodeId rx = kNoNode;
  };
  std::vector<std::vector<Link>> primaryCells; ///< TDMA order per active primary TX cell
  std::vector<Region> preservation;
  std::vector<std::vector<Link>> deliveries;   ///< TDMA order per admitted collection region
};

struct SimulationOptions
{
  bool recordAudit = true;
};

struct RawMetrics
{
  double lambdaP = 0.0;
  double lambdaS = 0.0;
  double delayP = 0.0;
  double delayS = 0.0;
  double primaryPacketSize = 0.0;   ///< mean over window packets
  double secondaryPacketSize = 0.0; ///< mean over window packets
  std::uint64_t primaryDeliveredInWindow = 0;
  std::uint64_t secondaryDeliveredInWindow = 0;
  std::uint64_t primaryDelaySamples = 0;
  std::uint64_t secondaryDelaySamples = 0;
  double dropRate = 0.0;
  double meanOverheadC = 0.0;     ///< D_p - (3/64) * segment transit, relayed packets
  double meanSegmentTransit = 0.0; ///< segment transit on the secondary-tier clock
  std::uint64_t relayedPackets = 0;
  std::uint64_t bundlesMeasured = 0;
  std::uint64_t bundlesWithinFrameGap = 0;
  std::int64_t maxSegmentGap = 0;
  bool lowConfidence = false;
  bool undrained = false;
  bool delayUndefinedP = false;
  bool delayUndefinedS = false;
};

/// Drives one run slot by slot: builds schedules, injects traffic, steps the
/// transport and records audit snapshots.
class Simulation
{
public:
  Simulation (const Deployment &d, const RelayAssignment &relays, SimulationOptions options = {});

  void Run ();
  RawMetrics Measure () const;

  const TransportState &State () const { return m_state; }
  const std::vector<AuditSlot> &AuditSlots () const { return m_audit; }
  std::int64_t SlotsRun () const { return m_slotsRun; }

private:
  void RunPrimarySlot (std::int64_t t, bool injecting);
  bool TrackedOutstanding () const;

  const Deployment &m_d;
  const RelayAssignment &m_relays;
  SimulationOptions m_options;
  TransportState m_state;
  ActivityTable m_primaryActivity;
  ActivityTable m_secondaryActivity;
  std::vector<std::vector<NodeId>> m_sourcesByPrimaryCell;
  std::array<std::vector<std::uint32_t>, kSlotsPerFrame> m_flowsBySlot;
  std::vector<bool> m_blocked;
  std::mt19937_64 m_primaryRng;
  std::mt19937_64 m_trafficRng;
  std::mt19937_64 m_primaryTrafficRng;
  std::vector<AuditSlot> m_audit;
  std::int64_t m_windowBegin = 0;
  std::int64_t m_windowEnd = 0;
  std::int64_t m_slotsRun = 0;
};

/// Secondary wall slots in [g0, g1) that fall in a primary-relay subframe.
std::int64_t RelaySubframeSlotsBetween (std::int64_t g0, std::int64_t g1);

} // namespace tiernet
