#pragma once

#include "tiernet/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace tiernet {

/// Horizontal run along the source row, then vertical run along the
/// destination column.
struct CellPath
{
  Tier tier = Tier::Primary;
  std::vector<CellCoord> cells;

  std::size_t Length () const { return cells.size (); }
};

CellPath HvPath (CellCoord src, CellCoord dst, const CellGrid &grid);

/// One designated relay per cell, fixed for a run. kNoNode marks empty cells.
struct RelayAssignment
{
  std::vector<NodeId> primaryCellRelay;   // chosen among both tiers
  std::vector<NodeId> secondaryCellRelay; // chosen among secondary nodes

  /// Fraction of non-empty primary cells whose relay is a secondary node.
  double SecondaryCaptureFraction (const Deployment &d) const;
};

RelayAssignment SelectRelays (const Deployment &d, std::uint64_t seed);

struct CellPair
{
  CellCoord src;
  CellCoord dst;
};

/// Number of HV paths containing each cell (row-major), computed with
/// per-row and per-column difference arrays.
std::vector<std::uint32_t> PathsThroughCell (std::span<const CellPair> pairs, const CellGrid &grid);

} // namespace tiernet
