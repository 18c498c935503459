#include "tiernet/schedule.hpp"

#include <algorithm>
#include <stdexcept>

namespace tiernet {

std::vector<CellCoord>
ActiveCells (const CellGrid &grid, int slot)
{
  if (slot < 0 || slot >= kSlotsPerFrame)
    throw std::out_of_range ("TDMA slot outside 0..63");
  const int u = slot / kClusterSide;
  const int v = slot % kClusterSide;
  std::vector<CellCoord> cells;
  for (int row = v; row < grid.SideCount (); row += kClusterSide)
    for (int col = u; col < grid.SideCount (); col += kClusterSide)
      cells.push_back ({col, row});
  return cells;
}

ActivityTable::ActivityTable (const CellGrid &grid)
{
  for (int s = 0; s < kSlotsPerFrame; ++s)
    m_active[s] = ActiveCells (grid, s);
}

Region
MakeRegion (RegionKind kind, CellCoord center, const CellGrid &primary, const CellGrid &secondary)
{
  const int kp = primary.SideCount ();
  const int ks = secondary.SideCount ();
  if (ks % kp != 0)
    throw std::invalid_argument ("secondary grid must refine the primary grid");
  const int q = ks / kp;
  Region r;
  r.kind = kind;
  r.center = center;
  r.primaryBlock = {std::max (center.col - 1, 0), std::max (center.row - 1, 0), std::min (center.col + 1, kp - 1),
                    std::min (center.row + 1, kp - 1)};
  r.secondaryCells = {std::max ((center.col - 1) * q - 1, 0), std::max ((center.row - 1) * q - 1, 0),
                      std::min ((center.col + 2) * q, ks - 1), std::min ((center.row + 2) * q, ks - 1)};
  return r;
}

std::vector<Region>
PreservationRegions (std::span<const CellCoord> activePrimaryTx, const CellGrid &primary, const CellGrid &secondary)
{
  std::vector<Region> regions;
  regions.reserve (activePrimaryTx.size ());
  for (CellCoord c : activePrimaryTx)
    regions.push_back (MakeRegion (RegionKind::Preservation, c, primary, secondary));
  return regions;
}

std::vector<bool>
BlockedSecondaryCells (std::span<const Region> preservation, const CellGrid &secondary)
{
  std::vector<bool> blocked (secondary.CellCount (), false);
  for (const auto &region : preservation)
    {
      const CellRect &r = region.secondaryCells;
      for (int row = r.row0; row <= r.row1; ++row)
        for (int col = r.col0; col <= r.col1; ++col)
          blocked[secondary.IndexOf ({col, row})] = true;
    }
  return blocked;
}

std::vector<Region>
PlaceCollectionRegions (std::span<const CellCoord> sinkCells, std::span<const Region> preservation,
                        const CellGrid &primary, const CellGrid &secondary)
{
  std::vector<CellCoord> order (sinkCells.begin (), sinkCells.end ());
  std::sort (order.begin (), order.end (), [&primary] (CellCoord a, CellCoord b) {
    return primary.IndexOf (a) < primary.IndexOf (b);
  });
  return AdmitCollectionRegions (order, preservation, primary, secondary);
}

std::vector<Region>
AdmitCollectionRegions (std::span<const CellCoord> prioritized, std::span<const Region> preservation,
                        const CellGrid &primary, const CellGrid &secondary)
{
  std::vector<Region> admitted;
  std::vector<CellCoord> seen;
  for (CellCoord sink : prioritized)
    {
      if (std::find (seen.begin (), seen.end (), sink) != seen.end ())
        continue;
      seen.push_back (sink);
      Region candidate = MakeRegion (RegionKind::Collection, sink, primary, secondary);
      auto clashes = [&candidate] (const Region &other) {
        return candidate.secondaryCells.Intersects (other.secondaryCells);
      };
      if (std::any_of (preservation.begin (), preservation.end (), clashes))
        continue;
      if (std::any_of (admitted.begin (), admitted.end (), clashes))
        continue;
      admitted.push_back (candidate);
    }
  return admitted;
}

} // namespace tiernet
