#include "tiernet/routing.hpp"

#include <random>
#include <stdexcept>

namespace tiernet {

CellPath
HvPath (CellCoord src, CellCoord dst, const CellGrid &grid)
{
  if (!grid.Contains (src) || !grid.Contains (dst))
    throw std::out_of_range ("HV path endpoint outside the grid");
  CellPath path;
  path.tier = grid.GetTier ();
  path.cells.reserve (std::abs (dst.col - src.col) + std::abs (dst.row - src.row) + 1);
  const int dc = dst.col >= src.col ? 1 : -1;
  const int dr = dst.row >= src.row ? 1 : -1;
  for (int c = src.col; c != dst.col; c += dc)
    path.cells.push_back ({c, src.row});
  for (int r = src.row; r != dst.row; r += dr)
    path.cells.push_back ({dst.col, r});
  path.cells.push_back (dst);
  return path;
}

double
RelayAssignment::SecondaryCaptureFraction (const Deployment &d) const
{
  std::size_t occupied = 0;
  std::size_t captured = 0;
  for (NodeId relay : primaryCellRelay)
    {
      if (relay == kNoNode)
        continue;
      ++occupied;
      captured += d.IsPrimary (relay) ? 0 : 1;
    }
  return occupied == 0 ? 0.0 : static_cast<double> (captured) / occupied;
}

RelayAssignment
SelectRelays (const Deployment &d, std::uint64_t seed)
{
  RelayAssignment a;
  std::mt19937_64 rng (seed);
  const CellGrid &pg = d.PrimaryGrid ();
  a.primaryCellRelay.assign (pg.CellCount (), kNoNode);
  for (std::size_t c = 0; c < pg.CellCount (); ++c)
    {
      const auto primaries = static_cast<std::uint64_t> (d.primaryOccupancy[c].size ());
      const std::uint64_t total = primaries + d.secondaryPerPrimaryCell[c];
      if (total == 0)
        continue;
      const std::uint64_t pick = std::uniform_int_distribution<std::uint64_t> (0, total - 1) (rng);
      a.primaryCellRelay[c] = pick < primaries
                                ? d.primaryOccupancy[c][pick]
                                : d.SecondaryInPrimaryCell (c, static_cast<std::uint32_t> (pick - primaries));
    }
  const CellGrid &sg = d.SecondaryGrid ();
  a.secondaryCellRelay.assign (sg.CellCount (), kNoNode);
  for (std::size_t c = 0; c < sg.CellCount (); ++c)
    {
      const IdRange range = d.secondary.CellRange (c);
      if (range.size () == 0)
        continue;
      a.secondaryCellRelay[c] = std::uniform_int_distribution<NodeId> (range.first, range.last - 1) (rng);
    }
  return a;
}

std::vector<std::uint32_t>
PathsThroughCell (std::span<const CellPair> pairs, const CellGrid &grid)
{
  const int k = grid.SideCount ();
  const std::size_t stride = static_cast<std::size_t> (k) + 1;
  // rowDiff[row][col] marks horizontal runs, colDiff[col][row] vertical runs.
  std::vector<std::int64_t> rowDiff (stride * k, 0);
  std::vector<std::int64_t> colDiff (stride * k, 0);
  for (const auto &p : pairs)
    {
      const int c0 = std::min (p.src.col, p.dst.col);
      const int c1 = std::max (p.src.col, p.dst.col);
      rowDiff[p.src.row * stride + c0] += 1;
      rowDiff[p.src.row * stride + c1 + 1] -= 1;
      if (p.src.row != p.dst.row)
        {
          // The turn cell already belongs to the horizontal run.
          const int step = p.dst.row > p.src.row ? 1 : -1;
          const int r0 = std::min (p.src.row + step, p.dst.row);
          const int r1 = std::max (p.src.row + step, p.dst.row);
          colDiff[p.dst.col * stride + r0] += 1;
          colDiff[p.dst.col * stride + r1 + 1] -= 1;
        }
    }
  std::vector<std::uint32_t> counts (grid.CellCount (), 0);
  for (int r = 0; r < k; ++r)
    {
      std::int64_t run = 0;
      for (int c = 0; c < k; ++c)
        {
          run += rowDiff[r * stride + c];
          counts[grid.IndexOf ({c, r})] += static_cast<std::uint32_t> (run);
        }
    }
  for (int c = 0; c < k; ++c)
    {
      std::int64_t run = 0;
      for (int r = 0; r < k; ++r)
        {
          run += colDiff[c * stride + r];
          counts[grid.IndexOf ({c, r})] += static_cast<std::uint32_t> (run);
        }
    }
  return counts;
}

} // namespace tiernet
