#pragma once

#include "tiernet/geometry.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace tiernet {

inline constexpr int kClusterSide = 8;
inline constexpr int kSlotsPerFrame = kClusterSide * kClusterSide;
inline constexpr int kSubframes = 3;

enum class Subframe : std::uint8_t
{
  IntraSecondary = 0,
  PrimaryRelay = 1,
  Delivery = 2
};

/// Position in time. Each secondary subframe lasts one primary slot and holds
/// 64 secondary slots, so a secondary frame spans three primary slots.
struct SlotIndex
{
  std::int64_t primarySlot = 0; ///< absolute primary slot
  int secondarySlot = 0;        ///< 0..63 inside the primary slot

  std::int64_t PrimaryFrame () const { return primarySlot / kSlotsPerFrame; }
  int PrimarySlotInFrame () const { return static_cast<int> (primarySlot % kSlotsPerFrame); }
  std::int64_t SecondaryFrame () const { return primarySlot / kSubframes; }
  Subframe GetSubframe () const { return static_cast<Subframe> (primarySlot % kSubframes); }
  /// Secondary-tier clock: 64 ticks per secondary frame.
  std::int64_t SecondaryClock () const { return SecondaryFrame () * kSlotsPerFrame + secondarySlot; }
  /// Wall clock in secondary-slot units.
  std::int64_t GlobalSecondarySlot () const { return primarySlot * kSlotsPerFrame + secondarySlot; }
};

/// Round-robin slot of a cell inside its 8x8 cluster.
constexpr int
LocalSlot (CellCoord c)
{
  return kClusterSide * (c.col % kClusterSide) + c.row % kClusterSide;
}

std::vector<CellCoord> ActiveCells (const CellGrid &grid, int slot);

/// Inclusive rectangle of cells.
struct CellRect
{
  int col0 = 0;
  int row0 = 0;
  int col1 = -1;
  int row1 = -1;

  bool Empty () const { return col1 < col0 || row1 < row0; }
  bool Contains (CellCoord c) const { return c.col >= col0 && c.col <= col1 && c.row >= row0 && c.row <= row1; }
  bool Intersects (const CellRect &o) const
  {
    return !Empty () && !o.Empty () && col0 <= o.col1 && o.col0 <= col1 && row0 <= o.row1 && o.row0 <= row1;
  }
  std::int64_t Count () const
  {
    return Empty () ? 0 : static_cast<std::int64_t> (col1 - col0 + 1) * (row1 - row0 + 1);
  }
};

enum class RegionKind : std::uint8_t
{
  Preservation,
  Collection
};

/// 3x3 primary cells around a center plus one ring of secondary cells,
/// clipped at the unit square.
struct Region
{
  RegionKind kind = RegionKind::Preservation;
  CellCoord center;      // primary grid
  CellRect primaryBlock; // primary grid
  CellRect secondaryCells;
};

Region MakeRegion (RegionKind kind, CellCoord center, const CellGrid &primary, const CellGrid &secondary);

std::vector<Region> PreservationRegions (std::span<const CellCoord> activePrimaryTx, const CellGrid &primary,
                                         const CellGrid &secondary);

/// Bitmap over secondary cells (row-major): true where some region covers the cell.
std::vector<bool> BlockedSecondaryCells (std::span<const Region> preservation, const CellGrid &secondary);

/// Greedy admission in ascending sink-cell index order. A request is admitted
/// when its region overlaps neither a preservation region nor an already
/// admitted collection region. Duplicate sink cells collapse to one request.
std::vector<Region> PlaceCollectionRegions (std::span<const CellCoord> sinkCells, std::span<const Region> preservation,
                                            const CellGrid &primary, const CellGrid &secondary);

/// Same admission rule, taking requests in the given priority order.
std::vector<Region> AdmitCollectionRegions (std::span<const CellCoord> prioritized, std::span<const Region> preservation,
                                            const CellGrid &primary, const CellGrid &secondary);

struct SlotSchedule
{
  SlotIndex index;
  std::span<const CellCoord> activePrimaryCells;
  std::span<const CellCoord> activeSecondaryCells; // pre-blocking
  std::span<const Region> preservation;
  std::span<const Region> collections;             // delivery subframe only
  const std::vector<bool> *blocked = nullptr;

  bool IsBlocked (std::size_t secondaryCell) const { return blocked && (*blocked)[secondaryCell]; }
};

/// Active-cell lists for every slot of both grids, built once per deployment.
class ActivityTable
{
public:
  explicit ActivityTable (const CellGrid &grid);
  std::span<const CellCoord> Active (int slot) const { return m_active[slot]; }

private:
  std::array<std::vector<CellCoord>, kSlotsPerFrame> m_active;
};

} // namespace tiernet
