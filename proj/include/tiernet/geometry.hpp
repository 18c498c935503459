#pragma once

#include "tiernet/config.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace tiernet {

struct Point
{
  double x = 0.0;
  double y = 0.0;
};

inline double
Distance (Point a, Point b)
{
  return std::hypot (a.x - b.x, a.y - b.y);
}

enum class Tier : std::uint8_t
{
  Primary,
  Secondary
};

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max ();

struct Node
{
  NodeId id = kNoNode;
  Tier tier = Tier::Primary;
  Point position;
  std::optional<NodeId> sdPeer;
};

struct CellCoord
{
  int col = 0;
  int row = 0;
  auto operator<=> (const CellCoord &) const = default;
};

/// Square tessellation of the unit square, side_count cells per axis.
class CellGrid
{
public:
  CellGrid () = default;
  CellGrid (int sideCount, Tier tier);

  int SideCount () const { return m_side; }
  double CellArea () const { return 1.0 / (static_cast<double> (m_side) * m_side); }
  double CellSide () const { return 1.0 / m_side; }
  Tier GetTier () const { return m_tier; }
  std::size_t CellCount () const { return static_cast<std::size_t> (m_side) * m_side; }

  bool Contains (CellCoord c) const { return c.col >= 0 && c.row >= 0 && c.col < m_side && c.row < m_side; }
  CellCoord CellOf (Point p) const;
  std::size_t IndexOf (CellCoord c) const { return static_cast<std::size_t> (c.row) * m_side + c.col; }
  CellCoord CoordOf (std::size_t index) const
  {
    return {static_cast<int> (index % m_side), static_cast<int> (index / m_side)};
  }
  Point Origin (CellCoord c) const { return {c.col * CellSide (), c.row * CellSide ()}; }
  Point Center (CellCoord c) const { return {(c.col + 0.5) * CellSide (), (c.row + 0.5) * CellSide ()}; }

private:
  int m_side = 0;
  Tier m_tier = Tier::Primary;
};

struct GridSizing
{
  double targetArea = 0.0;
  CellGrid grid;
};

/// Poisson point process of the given density on [0,1)^2.
std::vector<Point> SamplePpp (double density, std::uint64_t seed);

/// Primary cells: target = ap_scale * 2 ln n / n, side count rounded so the
/// realized area 1/k^2 stays >= target. With clusterAligned the side count is
/// also a multiple of 8; otherwise any k >= 2 is accepted.
GridSizing PrimaryCellArea (double n, double apScale, bool clusterAligned = false);

/// Secondary cells: target = beta^2 n^2 a_p^2 / (2 m ln m); k_s = q k_p with
/// q = floor(sqrt(a_p / target)) so the secondary grid refines the primary one.
GridSizing SecondaryCellArea (double n, double beta, double realizedAp, int primarySide);

struct SdPair
{
  NodeId source = kNoNode;
  NodeId destination = kNoNode;
};

/// Uniformly random matching of indices [0, count) into ordered pairs.
/// With an odd count one uniformly chosen index stays unpaired.
std::vector<std::pair<std::uint32_t, std::uint32_t>> PairSd (std::size_t count, std::uint64_t seed);

struct IdRange
{
  NodeId first = 0;
  NodeId last = 0; // exclusive
  std::size_t size () const { return last - first; }
};

/// Secondary nodes as a cell-stratified PPP: each secondary cell holds an
/// independent Poisson(m a_s) count, ids run contiguously in cell order, and
/// positions are reproduced on demand from the run seed.
class SecondaryField
{
public:
  SecondaryField () = default;
  SecondaryField (const CellGrid &grid, double density, NodeId firstId, std::uint64_t seed);

  std::size_t Size () const { return m_offsets.empty () ? 0 : m_offsets.back (); }
  NodeId FirstId () const { return m_firstId; }
  IdRange CellRange (std::size_t cell) const
  {
    return {m_firstId + m_offsets[cell], m_firstId + m_offsets[cell + 1]};
  }
  std::uint32_t CellCount (std::size_t cell) const { return m_offsets[cell + 1] - m_offsets[cell]; }
  std::size_t CellOf (NodeId id) const;
  Point Position (NodeId id) const;

private:
  CellGrid m_grid;
  NodeId m_firstId = 0;
  std::uint64_t m_positionKey = 0;
  std::vector<std::uint32_t> m_offsets; // size cells + 1
};

struct DeploymentOptions
{
  bool pairSecondary = true;
};

/// Immutable two-tier network for one SimConfig.
struct Deployment
{
  SimConfig config;
  GridSizing primarySizing;
  GridSizing secondarySizing;
  std::vector<Node> primaryNodes; // ids [0, P)
  SecondaryField secondary;       // ids [P, P + S)
  std::vector<std::vector<NodeId>> primaryOccupancy;   // per primary cell
  std::vector<std::uint32_t> secondaryPerPrimaryCell;  // secondary count per primary cell
  std::vector<NodeId> secondaryPeer;                   // by secondary local index, kNoNode if unpaired
  std::vector<SdPair> primaryPairs;
  std::vector<SdPair> secondaryPairs;

  const CellGrid &PrimaryGrid () const { return primarySizing.grid; }
  const CellGrid &SecondaryGrid () const { return secondarySizing.grid; }
  int Refinement () const { return SecondaryGrid ().SideCount () / PrimaryGrid ().SideCount (); }

  std::size_t PrimaryCount () const { return primaryNodes.size (); }
  std::size_t SecondaryCount () const { return secondary.Size (); }
  bool IsPrimary (NodeId id) const { return id < primaryNodes.size (); }
  Tier TierOf (NodeId id) const { return IsPrimary (id) ? Tier::Primary : Tier::Secondary; }
  Point Position (NodeId id) const;
  std::optional<NodeId> Peer (NodeId id) const;
  Node GetNode (NodeId id) const;

  /// Cell index on the node's own tier grid.
  std::size_t TierCellOf (NodeId id) const;
  /// Primary cell containing the node (any tier).
  std::size_t PrimaryCellOf (NodeId id) const;

  /// The j-th secondary node inside a primary cell, j < secondaryPerPrimaryCell[cell].
  NodeId SecondaryInPrimaryCell (std::size_t primaryCell, std::uint32_t j) const;
  /// Visits every secondary node id inside a primary cell.
  template <typename F> void ForEachSecondaryInPrimaryCell (std::size_t primaryCell, F &&visit) const;
};

Deployment BuildDeployment (const SimConfig &config, DeploymentOptions options = {});

struct OccupancyReport
{
  std::vector<std::uint32_t> primaryCounts;            // primary nodes per primary cell
  std::vector<std::uint32_t> secondaryInPrimaryCounts; // secondary nodes per primary cell
  std::vector<std::uint32_t> secondaryCounts;          // secondary nodes per secondary cell
  bool emptyPrimaryCell = false;
  bool emptySecondaryCell = false;
  bool primaryCellBelowRelayCount = false;
  std::size_t cellsBelowRelayCount = 0;
};

OccupancyReport CellOccupancy (const Deployment &deployment, std::uint32_t relayCount);

template <typename F>
void
Deployment::ForEachSecondaryInPrimaryCell (std::size_t primaryCell, F &&visit) const
{
  const int q = Refinement ();
  const CellCoord pc = PrimaryGrid ().CoordOf (primaryCell);
  const CellGrid &sg = SecondaryGrid ();
  for (int r = pc.row * q; r < (pc.row + 1) * q; ++r)
    {
      // Cells of one secondary row inside the primary cell are contiguous in id space.
      const IdRange first = secondary.CellRange (sg.IndexOf ({pc.col * q, r}));
      const IdRange last = secondary.CellRange (sg.IndexOf ({(pc.col + 1) * q - 1, r}));
      for (NodeId id = first.first; id < last.last; ++id)
        visit (id);
    }
}

} // namespace tiernet
