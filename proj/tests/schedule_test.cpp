#include "tiernet/schedule.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace tiernet;

namespace {

int
Chebyshev (CellCoord a, CellCoord b)
{
  return std::max (std::abs (a.col - b.col), std::abs (a.row - b.row));
}

// Secondary cells within one secondary cell of the 3x3 primary block, by enumeration.
std::int64_t
RegionSizeByEnumeration (CellCoord center, const CellGrid &primary, const CellGrid &secondary)
{
  const int q = secondary.SideCount () / primary.SideCount ();
  std::int64_t count = 0;
  for (int r = 0; r < secondary.SideCount (); ++r)
    for (int c = 0; c < secondary.SideCount (); ++c)
      {
        bool inside = false;
        for (int dr = -1; dr <= 1 && !inside; ++dr)
          for (int dc = -1; dc <= 1 && !inside; ++dc)
            {
              const CellCoord n{c + dc, r + dr};
              if (secondary.Contains (n) && Chebyshev ({n.col / q, n.row / q}, center) <= 1)
                inside = true;
            }
        count += inside ? 1 : 0;
      }
  return count;
}

bool
Overlap (const Region &a, const Region &b)
{
  return a.secondaryCells.Intersects (b.secondaryCells);
}

} // namespace

TEST_SUITE ("tdma_scheduler")
{
  TEST_CASE ("active cells on an 8 x 8 and a 16 x 16 grid")
  {
    const CellGrid g8 (8, Tier::Primary);
    const auto a = ActiveCells (g8, 0);
    REQUIRE (a.size () == 1);
    CHECK (a[0] == CellCoord{0, 0});

    const CellGrid g16 (16, Tier::Primary);
    const auto b = ActiveCells (g16, 0);
    CHECK (b.size () == 4);
    const std::set<CellCoord> expected{{0, 0}, {8, 0}, {0, 8}, {8, 8}};
    CHECK (std::set<CellCoord> (b.begin (), b.end ()) == expected);
    CHECK_THROWS_AS (ActiveCells (g8, 64), std::out_of_range);
    CHECK_THROWS_AS (ActiveCells (g8, -1), std::out_of_range);
  }

  TEST_CASE ("each cell is active in exactly one slot per frame")
  {
    for (int side : {2, 3, 8, 13, 24})
      {
        const CellGrid g (side, Tier::Secondary);
        const ActivityTable table (g);
        std::vector<int> hits (g.CellCount (), 0);
        for (int s = 0; s < kSlotsPerFrame; ++s)
          {
            const auto direct = ActiveCells (g, s);
            const auto cached = table.Active (s);
            CHECK (std::equal (direct.begin (), direct.end (), cached.begin (), cached.end ()));
            for (CellCoord c : direct)
              {
                CHECK (LocalSlot (c) == s);
                ++hits[g.IndexOf (c)];
              }
            for (std::size_t i = 0; i < direct.size (); ++i)
              for (std::size_t j = i + 1; j < direct.size (); ++j)
                CHECK (Chebyshev (direct[i], direct[j]) >= kClusterSide);
          }
        CHECK (std::all_of (hits.begin (), hits.end (), [] (int h) { return h == 1; }));
      }
  }

  TEST_CASE ("slot index arithmetic")
  {
    const SlotIndex a{0, 5};
    CHECK (a.GetSubframe () == Subframe::IntraSecondary);
    CHECK (a.SecondaryClock () == 5);
    const SlotIndex b{4, 10};
    CHECK (b.GetSubframe () == Subframe::PrimaryRelay);
    CHECK (b.SecondaryFrame () == 1);
    CHECK (b.SecondaryClock () == 74);
    CHECK (b.GlobalSecondarySlot () == 266);
    const SlotIndex c{131, 0};
    CHECK (c.PrimaryFrame () == 2);
    CHECK (c.PrimarySlotInFrame () == 3);
    CHECK (c.GetSubframe () == Subframe::Delivery);
    for (std::int64_t t = 0; t < 30; ++t)
      CHECK (static_cast<int> (SlotIndex{t, 0}.GetSubframe ()) == t % 3);
  }

  TEST_CASE ("interior region covers (3q + 2)^2 secondary cells")
  {
    const CellGrid primary (16, Tier::Primary);
    const CellGrid secondary (16 * 39, Tier::Secondary);
    const Region r = MakeRegion (RegionKind::Preservation, {7, 7}, primary, secondary);
    CHECK (r.secondaryCells.Count () == 14161);
    CHECK (r.primaryBlock.Count () == 9);
    const CellGrid p8 (8, Tier::Primary);
    const CellGrid s8 (8 * 5, Tier::Secondary);
    CHECK (MakeRegion (RegionKind::Preservation, {3, 4}, p8, s8).secondaryCells.Count ()
           == RegionSizeByEnumeration ({3, 4}, p8, s8));
  }

  TEST_CASE ("regions clip at the border")
  {
    const CellGrid primary (8, Tier::Primary);
    for (int q : {1, 3, 6})
      {
        const CellGrid secondary (8 * q, Tier::Secondary);
        for (CellCoord center : {CellCoord{0, 0}, CellCoord{7, 7}, CellCoord{0, 4}, CellCoord{7, 2}, CellCoord{3, 3}})
          {
            CAPTURE (q);
            CAPTURE (center.col);
            CAPTURE (center.row);
            const Region r = MakeRegion (RegionKind::Collection, center, primary, secondary);
            CHECK (r.secondaryCells.Count () == RegionSizeByEnumeration (center, primary, secondary));
          }
        const Region corner = MakeRegion (RegionKind::Collection, {0, 0}, primary, secondary);
        CHECK (corner.secondaryCells.Count () == (2 * q + 1) * (2 * q + 1));
      }
    CHECK_THROWS_AS (MakeRegion (RegionKind::Collection, {0, 0}, primary, CellGrid (12, Tier::Secondary)),
                     std::invalid_argument);
  }

  TEST_CASE ("concurrent transmitters eight cells apart have disjoint regions")
  {
    const CellGrid primary (16, Tier::Primary);
    const CellGrid secondary (16 * 4, Tier::Secondary);
    const auto active = ActiveCells (primary, 27);
    const auto regions = PreservationRegions (active, primary, secondary);
    REQUIRE (regions.size () == active.size ());
    for (std::size_t i = 0; i < regions.size (); ++i)
      for (std::size_t j = i + 1; j < regions.size (); ++j)
        CHECK_FALSE (Overlap (regions[i], regions[j]));
  }

  TEST_CASE ("blocked secondary cells")
  {
    const CellGrid primary (16, Tier::Primary);
    const CellGrid secondary (16 * 39, Tier::Secondary);
    const auto clear = BlockedSecondaryCells ({}, secondary);
    CHECK (std::none_of (clear.begin (), clear.end (), [] (bool b) { return b; }));
    const CellCoord center[] = {{7, 7}};
    const auto regions = PreservationRegions (center, primary, secondary);
    const auto blocked = BlockedSecondaryCells (regions, secondary);
    CHECK (std::count (blocked.begin (), blocked.end (), true) == 14161);
  }

  TEST_CASE ("collection admission")
  {
    const CellGrid primary (16, Tier::Primary);
    const CellGrid secondary (16 * 4, Tier::Secondary);

    SUBCASE ("without preservation every separated request is admitted")
    {
      const CellCoord sinks[] = {{1, 1}, {9, 1}, {1, 9}, {9, 9}};
      const auto admitted = PlaceCollectionRegions (sinks, {}, primary, secondary);
      CHECK (admitted.size () == 4);
    }
    SUBCASE ("a sink under a preservation region is deferred")
    {
      const CellCoord tx[] = {{5, 5}};
      const auto pres = PreservationRegions (tx, primary, secondary);
      const CellCoord sinks[] = {{6, 6}, {12, 12}};
      const auto admitted = PlaceCollectionRegions (sinks, pres, primary, secondary);
      REQUIRE (admitted.size () == 1);
      CHECK (admitted[0].center == CellCoord{12, 12});
      CHECK (admitted[0].kind == RegionKind::Collection);
    }
    SUBCASE ("sinks two cells apart admit at most one")
    {
      const CellCoord sinks[] = {{4, 4}, {6, 4}};
      CHECK (PlaceCollectionRegions (sinks, {}, primary, secondary).size () == 1);
    }
    SUBCASE ("duplicates collapse")
    {
      const CellCoord sinks[] = {{4, 4}, {4, 4}, {12, 4}};
      CHECK (PlaceCollectionRegions (sinks, {}, primary, secondary).size () == 2);
    }
    SUBCASE ("priority order decides between conflicting requests")
    {
      const CellCoord sinks[] = {{6, 4}, {4, 4}};
      const auto admitted = AdmitCollectionRegions (sinks, {}, primary, secondary);
      REQUIRE (admitted.size () == 1);
      CHECK (admitted[0].center == CellCoord{6, 4});
      const auto byIndex = PlaceCollectionRegions (sinks, {}, primary, secondary);
      REQUIRE (byIndex.size () == 1);
      CHECK (byIndex[0].center == CellCoord{4, 4});
    }
  }

  TEST_CASE ("admitted regions never overlap each other or preservation regions")
  {
    std::mt19937_64 rng (17);
    const CellGrid primary (24, Tier::Primary);
    const CellGrid secondary (24 * 3, Tier::Secondary);
    std::uniform_int_distribution<int> pick (0, 23);
    std::uniform_int_distribution<int> slot (0, 63);
    for (int trial = 0; trial < 200; ++trial)
      {
        const auto tx = ActiveCells (primary, slot (rng));
        const auto pres = PreservationRegions (tx, primary, secondary);
        std::vector<CellCoord> sinks (12);
        for (auto &s : sinks)
          s = {pick (rng), pick (rng)};
        const auto admitted = AdmitCollectionRegions (sinks, pres, primary, secondary);
        for (std::size_t i = 0; i < admitted.size (); ++i)
          {
            for (const auto &p : pres)
              CHECK_FALSE (Overlap (admitted[i], p));
            for (std::size_t j = i + 1; j < admitted.size (); ++j)
              CHECK_FALSE (Overlap (admitted[i], admitted[j]));
          }
        // Maximality: every rejected request conflicts with something.
        for (const auto &s : sinks)
          {
            const bool taken = std::any_of (admitted.begin (), admitted.end (),
                                            [&] (const Region &r) { return r.center == s; });
            if (taken)
              continue;
            const Region r = MakeRegion (RegionKind::Collection, s, primary, secondary);
            const bool conflicts
                = std::any_of (pres.begin (), pres.end (), [&] (const Region &p) { return Overlap (r, p); })
                  || std::any_of (admitted.begin (), admitted.end (), [&] (const Region &a) { return Overlap (r, a); });
            CHECK (conflicts);
          }
      }
  }
}
