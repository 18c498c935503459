#include "tiernet/geometry.hpp"

#include "tiernet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tiernet {

CellGrid::CellGrid (int sideCount, Tier tier)
  : m_side (sideCount),
    m_tier (tier)
{
  if (sideCount <= 0)
    throw ConfigError ("cell grid side count must be positive");
}

CellCoord
CellGrid::CellOf (Point p) const
{
  auto clampIndex = [this] (double v) {
    const int i = static_cast<int> (std::floor (v * m_side));
    return std::clamp (i, 0, m_side - 1);
  };
  return {clampIndex (p.x), clampIndex (p.y)};
}

std::vector<Point>
SamplePpp (double density, std::uint64_t seed)
{
  if (!(density > 0.0))
    throw std::invalid_argument ("PPP density must be positive");
  std::mt19937_64 rng (seed);
  std::poisson_distribution<std::uint64_t> count (density);
  std::uniform_real_distribution<double> unit (0.0, 1.0);
  std::vector<Point> points (count (rng));
  for (auto &p : points)
    {
      p.x = unit (rng);
      p.y = unit (rng);
    }
  return points;
}

GridSizing
PrimaryCellArea (double n, double apScale, bool clusterAligned)
{
  if (!(n > std::exp (1.0)))
    throw ConfigError ("primary cell sizing needs n > e, got n = " + std::to_string (n));
  if (!(apScale >= 1.0))
    throw ConfigError ("ap_scale must be >= 1");
  const double target = apScale * 2.0 * std::log (n) / n;
  const double inv = 1.0 / std::sqrt (target);
  int side = 0;
  if (clusterAligned)
    {
      side = 8 * static_cast<int> (std::floor (inv / 8.0));
      if (side < 8)
        throw ConfigError ("primary target area " + std::to_string (target)
                           + " leaves no room for one 64-cell cluster (k_p < 8)");
    }
  else
    {
      side = static_cast<int> (std::floor (inv));
      if (side < 2)
        throw ConfigError ("primary target area " + std::to_string (target) + " gives fewer than 2 cells per axis");
    }
  return {target, CellGrid (side, Tier::Primary)};
}

GridSizing
SecondaryCellArea (double n, double beta, double realizedAp, int primarySide)
{
  const double m = std::pow (n, beta);
  if (!(m > std::exp (1.0)))
    throw ConfigError ("secondary cell sizing needs m > e");
  const double target = beta * beta * n * n * realizedAp * realizedAp / (2.0 * m * std::log (m));
  const int q = static_cast<int> (std::floor (std::sqrt (realizedAp / target)));
  if (q < 1)
    throw ConfigError ("secondary cells would be coarser than primary cells (q < 1)");
  return {target, CellGrid (primarySide * q, Tier::Secondary)};
}

std::vector<std::pair<std::uint32_t, std::uint32_t>>
PairSd (std::size_t count, std::uint64_t seed)
{
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  if (count < 2)
    return pairs;
  std::vector<std::uint32_t> order (count);
  std::iota (order.begin (), order.end (), 0u);
  std::mt19937_64 rng (seed);
  std::shuffle (order.begin (), order.end (), rng);
  // After a uniform shuffle, dropping the last element leaves a uniform unpaired node.
  pairs.reserve (count / 2);
  for (std::size_t i = 0; i + 1 < count; i += 2)
    pairs.emplace_back (order[i], order[i + 1]);
  return pairs;
}

SecondaryField::SecondaryField (const CellGrid &grid, double density, NodeId firstId, std::uint64_t seed)
  : m_grid (grid),
    m_firstId (firstId),
    m_positionKey (DeriveSeed (seed, Stream::SecondaryPositions))
{
  std::mt19937_64 rng (DeriveSeed (seed, Stream::SecondaryPpp));
  std::poisson_distribution<std::uint32_t> count (density * grid.CellArea ());
  m_offsets.resize (grid.CellCount () + 1);
  m_offsets[0] = 0;
  for (std::size_t c = 0; c < grid.CellCount (); ++c)
    {
      const std::uint64_t next = static_cast<std::uint64_t> (m_offsets[c]) + count (rng);
      if (next + firstId >= kNoNode)
        throw ConfigError ("secondary population exceeds the 32-bit node id space");
      m_offsets[c + 1] = static_cast<std::uint32_t> (next);
    }
}

std::size_t
SecondaryField::CellOf (NodeId id) const
{
  const std::uint32_t local = id - m_firstId;
  auto it = std::upper_bound (m_offsets.begin (), m_offsets.end (), local);
  return static_cast<std::size_t> (it - m_offsets.begin ()) - 1;
}

Point
SecondaryField::Position (NodeId id) const
{
  const CellCoord c = m_grid.CoordOf (CellOf (id));
  const Point origin = m_grid.Origin (c);
  const double side = m_grid.CellSide ();
  // Keep the point strictly inside its own cell.
  const double u = std::min (HashUniform (m_positionKey, 2ull * id), 1.0 - 0x1.0p-40);
  const double v = std::min (HashUniform (m_positionKey, 2ull * id + 1), 1.0 - 0x1.0p-40);
  return {origin.x + u * side, origin.y + v * side};
}

Point
Deployment::Position (NodeId id) const
{
  return IsPrimary (id) ? primaryNodes[id].position : secondary.Position (id);
}

std::optional<NodeId>
Deployment::Peer (NodeId id) const
{
  if (IsPrimary (id))
    return primaryNodes[id].sdPeer;
  const std::size_t local = id - secondary.FirstId ();
  if (local >= secondaryPeer.size () || secondaryPeer[local] == kNoNode)
    return std::nullopt;
  return secondaryPeer[local];
}

Node
Deployment::GetNode (NodeId id) const
{
  if (IsPrimary (id))
    return primaryNodes[id];
  return {id, Tier::Secondary, secondary.Position (id), Peer (id)};
}

std::size_t
Deployment::TierCellOf (NodeId id) const
{
  if (IsPrimary (id))
    return PrimaryGrid ().IndexOf (PrimaryGrid ().CellOf (primaryNodes[id].position));
  return secondary.CellOf (id);
}

std::size_t
Deployment::PrimaryCellOf (NodeId id) const
{
  if (IsPrimary (id))
    return TierCellOf (id);
  const CellCoord sc = SecondaryGrid ().CoordOf (secondary.CellOf (id));
  const int q = Refinement ();
  return PrimaryGrid ().IndexOf ({sc.col / q, sc.row / q});
}

NodeId
Deployment::SecondaryInPrimaryCell (std::size_t primaryCell, std::uint32_t j) const
{
  const int q = Refinement ();
  const CellCoord pc = PrimaryGrid ().CoordOf (primaryCell);
  const CellGrid &sg = SecondaryGrid ();
  for (int r = pc.row * q; r < (pc.row + 1) * q; ++r)
    {
      const NodeId first = secondary.CellRange (sg.IndexOf ({pc.col * q, r})).first;
      const NodeId last = secondary.CellRange (sg.IndexOf ({(pc.col + 1) * q - 1, r})).last;
      if (j < last - first)
        return first + j;
      j -= last - first;
    }
  throw std::out_of_range ("secondary index beyond primary cell population");
}

Deployment
BuildDeployment (const SimConfig &config, DeploymentOptions options)
{
  config.Validate ();
  Deployment d;
  d.config = config;
  d.primarySizing = PrimaryCellArea (config.n, config.apScale, config.clusterAlignedGrid);
  d.secondarySizing = SecondaryCellArea (config.n, config.beta, d.PrimaryGrid ().CellArea (),
                                         d.PrimaryGrid ().SideCount ());

  const auto points = SamplePpp (config.n, DeriveSeed (config.seed, Stream::PrimaryPpp));
  d.primaryNodes.resize (points.size ());
  for (std::size_t i = 0; i < points.size (); ++i)
    d.primaryNodes[i] = {static_cast<NodeId> (i), Tier::Primary, points[i], std::nullopt};

  d.secondary = SecondaryField (d.SecondaryGrid (), config.M (), static_cast<NodeId> (points.size ()), config.seed);

  const CellGrid &pg = d.PrimaryGrid ();
  d.primaryOccupancy.assign (pg.CellCount (), {});
  for (const auto &node : d.primaryNodes)
    d.primaryOccupancy[pg.IndexOf (pg.CellOf (node.position))].push_back (node.id);

  d.secondaryPerPrimaryCell.assign (pg.CellCount (), 0);
  const CellGrid &sg = d.SecondaryGrid ();
  const int q = d.Refinement ();
  for (std::size_t c = 0; c < sg.CellCount (); ++c)
    {
      const CellCoord sc = sg.CoordOf (c);
      d.secondaryPerPrimaryCell[pg.IndexOf ({sc.col / q, sc.row / q})] += d.secondary.CellCount (c);
    }

  for (auto [a, b] : PairSd (d.primaryNodes.size (), DeriveSeed (config.seed, Stream::PrimaryPairing)))
    {
      d.primaryNodes[a].sdPeer = b;
      d.primaryNodes[b].sdPeer = a;
      d.primaryPairs.push_back ({a, b});
    }

  if (options.pairSecondary)
    {
      const NodeId base = d.secondary.FirstId ();
      d.secondaryPeer.assign (d.secondary.Size (), kNoNode);
      const auto pairs = PairSd (d.secondary.Size (), DeriveSeed (config.seed, Stream::SecondaryPairing));
      d.secondaryPairs.reserve (pairs.size ());
      for (auto [a, b] : pairs)
        {
          d.secondaryPeer[a] = base + b;
          d.secondaryPeer[b] = base + a;
          d.secondaryPairs.push_back ({base + a, base + b});
        }
    }
  return d;
}

OccupancyReport
CellOccupancy (const Deployment &d, std::uint32_t relayCount)
{
  OccupancyReport r;
  const CellGrid &pg = d.PrimaryGrid ();
  const CellGrid &sg = d.SecondaryGrid ();
  r.primaryCounts.resize (pg.CellCount ());
  for (std::size_t c = 0; c < pg.CellCount (); ++c)
    {
      r.primaryCounts[c] = static_cast<std::uint32_t> (d.primaryOccupancy[c].size ());
      r.emptyPrimaryCell |= r.primaryCounts[c] == 0;
    }
  r.secondaryInPrimaryCounts = d.secondaryPerPrimaryCell;
  for (auto s : r.secondaryInPrimaryCounts)
    {
      if (s < relayCount)
        ++r.cellsBelowRelayCount;
    }
  r.primaryCellBelowRelayCount = r.cellsBelowRelayCount > 0;
  r.secondaryCounts.resize (sg.CellCount ());
  for (std::size_t c = 0; c < sg.CellCount (); ++c)
    {
      r.secondaryCounts[c] = d.secondary.CellCount (c);
      r.emptySecondaryCell |= r.secondaryCounts[c] == 0;
    }
  return r;
}

} // namespace tiernet
