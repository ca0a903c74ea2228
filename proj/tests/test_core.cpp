#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ecotrade/core.hpp"
#include "support/oracles.hpp"

using namespace ecotrade;

namespace {

GameRules tiny_rules() {
  GameRules r;
  r.width = 2;
  r.height = 2;
  r.base_credit_range = {5, 5};
  r.agri_revenue_range = {3, 3};
  r.obligation = 0;
  return r;
}

// Hand-built Running state: grid of given size, one owner per parcel list.
GameState grid_state(std::int64_t w, std::int64_t h, std::vector<PlayerId> owners, LandUse use,
                     Ecopoints base, Money revenue, Ecopoints bonus) {
  GameState s;
  s.rules.width = w;
  s.rules.height = h;
  s.rules.bonus_weight = bonus;
  s.rules.obligation = 0;
  s.rules.total_ticks = 10;
  s.landscape = {w, h, {}};
  std::set<PlayerId> ids(owners.begin(), owners.end());
  for (PlayerId id : ids) s.players.push_back({id, "p" + std::to_string(id), 0, 0, {}});
  for (std::int64_t i = 0; i < w * h; ++i) {
    s.landscape.parcels.push_back({i, {i / w, i % w}, owners[static_cast<std::size_t>(i)], use, base, revenue});
    s.player(owners[static_cast<std::size_t>(i)]).owned_parcels.push_back(i);
  }
  s.phase = Phase::Running;
  return s;
}

}  // namespace

TEST(GenerateLandscape, DegenerateRangesGiveConstants) {
  const std::vector<PlayerId> players{7};
  const Landscape land = generate_landscape(tiny_rules(), players);
  ASSERT_EQ(land.parcels.size(), 4u);
  for (const Parcel& p : land.parcels) {
    EXPECT_EQ(p.base_credit, 5);
    EXPECT_EQ(p.agri_revenue, 3);
    EXPECT_EQ(p.owner, 7);
  }
}

TEST(GenerateLandscape, SameInputsSameLandscape) {
  GameRules r;
  r.landscape_seed = 0xdeadbeefcafeull;
  const std::vector<PlayerId> players{1, 2, 3};
  EXPECT_EQ(generate_landscape(r, players), generate_landscape(r, players));
  GameRules other = r;
  other.landscape_seed += 1;
  EXPECT_NE(generate_landscape(r, players), generate_landscape(other, players));
}

TEST(GenerateLandscape, CrossPlatformValuesAreFrozen) {
  // mt19937_64 output is fixed by the standard and the range reduction is
  // ours, so these values must never change.
  GameRules r;
  r.width = 3;
  r.height = 1;
  r.base_credit_range = {0, 9};
  r.agri_revenue_range = {0, 9};
  r.landscape_seed = 42;
  r.obligation = 0;
  const std::vector<PlayerId> players{1};
  const Landscape land = generate_landscape(r, players);
  std::mt19937_64 rng(42);
  for (const Parcel& p : land.parcels) {
    // Rejection never triggers for span 10 with overwhelming probability;
    // the reference is the plain modulo of the standard engine.
    EXPECT_EQ(p.base_credit, static_cast<std::int64_t>(rng() % 10));
    EXPECT_EQ(p.agri_revenue, static_cast<std::int64_t>(rng() % 10));
  }
}

TEST(GenerateLandscape, InterleavedAlternatesRowMajor) {
  GameRules r;
  r.width = 4;
  r.height = 4;
  r.allocation_mode = AllocationMode::Interleaved;
  r.obligation = 0;
  const std::vector<PlayerId> players{11, 22};
  const Landscape land = generate_landscape(r, players);
  int first = 0, second = 0;
  for (const Parcel& p : land.parcels) {
    // Hand oracle: even row-major index -> first player.
    EXPECT_EQ(p.owner, p.parcel_id % 2 == 0 ? 11 : 22) << p.parcel_id;
    (p.owner == 11 ? first : second)++;
  }
  EXPECT_EQ(first, 8);
  EXPECT_EQ(second, 8);
}

TEST(GenerateLandscape, BlocksAreContiguousRuns) {
  GameRules r;
  r.width = 5;
  r.height = 2;
  r.allocation_mode = AllocationMode::Blocks;
  r.obligation = 0;
  const std::vector<PlayerId> players{1, 2, 3};
  const Landscape land = generate_landscape(r, players);
  // ceil(10 / 3) = 4: ids 0-3, 4-7, 8-9.
  const std::vector<PlayerId> expected{1, 1, 1, 1, 2, 2, 2, 2, 3, 3};
  for (const Parcel& p : land.parcels) EXPECT_EQ(p.owner, expected[static_cast<std::size_t>(p.parcel_id)]);
}

TEST(GenerateLandscape, Errors) {
  GameRules r = tiny_rules();
  const std::vector<PlayerId> five{1, 2, 3, 4, 5};
  try {
    generate_landscape(r, five);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewParcels);
  }
  r.base_credit_range = {6, 5};
  const std::vector<PlayerId> one{1};
  try {
    generate_landscape(r, one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidRules);
  }
  // 3x3 in blocks of ceil(9/4)=3 leaves the fourth player empty.
  GameRules b;
  b.width = 3;
  b.height = 3;
  b.allocation_mode = AllocationMode::Blocks;
  const std::vector<PlayerId> four{1, 2, 3, 4};
  EXPECT_THROW(generate_landscape(b, four), Error);
  const std::vector<PlayerId> none;
  EXPECT_THROW(generate_landscape(b, none), Error);
}

TEST(GenerateLandscape, InitialFeasibilityConservesCheapestFirst) {
  GameRules r;
  r.width = 4;
  r.height = 4;
  r.bonus_weight = 1;
  r.obligation = 25;
  r.base_credit_range = {1, 6};
  r.agri_revenue_range = {0, 9};
  r.allocation_mode = AllocationMode::Interleaved;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    r.landscape_seed = seed;
    const std::vector<PlayerSeat> seats{{1, "a"}, {2, "b"}};
    const GameState s = start_game(r, seats);
    for (const PlayerState& p : s.players) {
      // Independent replay of the rule on a fresh all-agriculture copy.
      GameState check = s;
      for (Parcel& q : check.landscape.parcels) {
        if (q.owner == p.player_id) q.land_use = LandUse::Agriculture;
      }
      // Earlier players' choices stay as generated; only this player's are redone.
      if (p.player_id == 2) {
        for (Parcel& q : check.landscape.parcels) {
          if (q.owner == 1) q.land_use = s.landscape.parcels[static_cast<std::size_t>(q.parcel_id)].land_use;
        }
      } else {
        for (Parcel& q : check.landscape.parcels) {
          if (q.owner == 2) q.land_use = LandUse::Agriculture;
        }
      }
      std::vector<ParcelId> order = p.owned_parcels;
      std::stable_sort(order.begin(), order.end(), [&](ParcelId a, ParcelId b) {
        return check.landscape.parcels[a].agri_revenue < check.landscape.parcels[b].agri_revenue;
      });
      for (ParcelId id : order) {
        if (oracle::production(check, p.player_id) >= r.obligation) break;
        check.landscape.parcels[static_cast<std::size_t>(id)].land_use = LandUse::Conservation;
      }
      for (ParcelId id : p.owned_parcels) {
        EXPECT_EQ(check.landscape.parcels[id].land_use, s.landscape.parcels[id].land_use)
            << "seed " << seed << " parcel " << id;
      }
    }
    // Later players only add conserved neighbors, so everyone who could be
    // compliant is.
    for (const PlayerState& p : s.players) {
      Ecopoints all = 0;
      for (ParcelId id : p.owned_parcels) all += s.landscape.parcels[id].base_credit;
      if (all >= r.obligation) EXPECT_GE(effective_balance(s, p.player_id), r.obligation) << seed;
    }
  }
}

TEST(Neighbors, CountsAndClipping) {
  const Landscape land = generate_landscape([] {
    GameRules r;
    r.width = 3;
    r.height = 3;
    r.obligation = 0;
    return r;
  }(), std::vector<PlayerId>{1});
  EXPECT_EQ(neighbors(land, {1, 1}, Neighborhood::Moore8).size(), 8u);
  EXPECT_EQ(neighbors(land, {0, 0}, Neighborhood::Moore8).size(), 3u);
  EXPECT_EQ(neighbors(land, {0, 0}, Neighborhood::VonNeumann4).size(), 2u);
  EXPECT_EQ(neighbors(land, {1, 1}, Neighborhood::VonNeumann4).size(), 4u);
  EXPECT_EQ(neighbors(land, {0, 1}, Neighborhood::Moore8).size(), 5u);
  try {
    neighbors(land, {3, 0}, Neighborhood::Moore8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfBounds);
  }
}

TEST(Neighbors, MatchesBruteForceAdjacency) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto hood = trial % 2 ? Neighborhood::Moore8 : Neighborhood::VonNeumann4;
    const GameState s = oracle::random_state(rng, 7, 1, hood, 1);
    for (const Parcel& p : s.landscape.parcels) {
      std::set<Coord> expected;
      for (const Parcel& q : s.landscape.parcels) {
        if (oracle::adjacent(hood, p.coord, q.coord)) expected.insert(q.coord);
      }
      const auto got = neighbors(s.landscape, p.coord, hood);
      EXPECT_EQ(std::set<Coord>(got.begin(), got.end()), expected);
      EXPECT_EQ(got.size(), expected.size());
    }
  }
}

TEST(ParcelCredits, Examples) {
  GameState s = grid_state(3, 3, std::vector<PlayerId>(9, 1), LandUse::Conservation, 10, 4, 2);
  EXPECT_EQ(parcel_credits(s.landscape, Coord{1, 1}, s.rules), 26);  // 10 + 2 x 8
  s.landscape.at(Coord{1, 1}).land_use = LandUse::Agriculture;
  EXPECT_EQ(parcel_credits(s.landscape, Coord{1, 1}, s.rules), 0);

  GameState lone = grid_state(3, 3, std::vector<PlayerId>(9, 1), LandUse::Agriculture, 10, 4, 2);
  lone.landscape.at(Coord{1, 1}).land_use = LandUse::Conservation;
  EXPECT_EQ(parcel_credits(lone.landscape, Coord{1, 1}, lone.rules), 10);
}

TEST(ParcelCredits, ZeroBonusIgnoresNeighbors) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    GameState s = oracle::random_state(rng, 6, 2, Neighborhood::Moore8, 0);
    for (Parcel& p : s.landscape.parcels) {
      const Ecopoints before = parcel_credits(s.landscape, p.coord, s.rules);
      for (const Coord& n : neighbors(s.landscape, p.coord, s.rules.neighborhood)) {
        Parcel& q = s.landscape.at(n);
        q.land_use = q.land_use == LandUse::Agriculture ? LandUse::Conservation : LandUse::Agriculture;
        EXPECT_EQ(parcel_credits(s.landscape, p.coord, s.rules), before);
      }
    }
  }
}

TEST(ParcelCredits, FlipTouchesOnlyParcelAndNeighbors) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    GameState s = oracle::random_state(rng, 8, 2, trial % 2 ? Neighborhood::Moore8 : Neighborhood::VonNeumann4, 3);
    std::vector<Ecopoints> before;
    for (const Parcel& p : s.landscape.parcels) before.push_back(parcel_credits(s.landscape, p.parcel_id, s.rules));
    std::uniform_int_distribution<std::size_t> pick(0, s.landscape.parcels.size() - 1);
    Parcel& flipped = s.landscape.parcels[pick(rng)];
    flipped.land_use = flipped.land_use == LandUse::Agriculture ? LandUse::Conservation : LandUse::Agriculture;
    for (const Parcel& p : s.landscape.parcels) {
      const bool near = p.parcel_id == flipped.parcel_id ||
                        oracle::adjacent(s.rules.neighborhood, p.coord, flipped.coord);
      if (!near) EXPECT_EQ(parcel_credits(s.landscape, p.parcel_id, s.rules), before[p.parcel_id]);
    }
  }
}

TEST(PlayerProduction, Examples) {
  GameState s = grid_state(2, 1, {1, 2}, LandUse::Agriculture, 7, 3, 2);
  EXPECT_EQ(player_production(s, 1), 0);
  s.landscape.at(ParcelId{0}).land_use = LandUse::Conservation;
  EXPECT_EQ(player_production(s, 1), 7);
  EXPECT_THROW(player_production(s, 99), Error);
}

TEST(PlayerProduction, MatchesDoubleLoopOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const GameState s = oracle::random_state(rng, 9, 3, trial % 2 ? Neighborhood::Moore8 : Neighborhood::VonNeumann4, 2);
    for (const PlayerState& p : s.players) {
      EXPECT_EQ(player_production(s, p.player_id), oracle::production(s, p.player_id));
    }
  }
}

TEST(EffectiveBalance, AddsNetTraded) {
  GameState s = grid_state(1, 1, {1}, LandUse::Conservation, 10, 0, 0);
  EXPECT_EQ(effective_balance(s, 1), 10);
  s.landscape.parcels[0].base_credit = 4;
  s.player(1).net_traded = 6;
  EXPECT_EQ(effective_balance(s, 1), 10);
  EXPECT_THROW(effective_balance(s, 2), Error);
}

TEST(LandUseChange, AcceptsWhenStillCompliant) {
  GameState s = grid_state(2, 1, {1, 1}, LandUse::Conservation, 10, 5, 0);
  s.rules.obligation = 10;
  EXPECT_EQ(apply_land_use_change(s, 1, 1, LandUse::Agriculture), ChangeOutcome::Applied);
  EXPECT_EQ(s.landscape.parcels[1].land_use, LandUse::Agriculture);
  EXPECT_EQ(effective_balance(s, 1), 10);
}

TEST(LandUseChange, RejectsOwnShortfallAndLeavesStateIdentical) {
  GameState s = grid_state(2, 1, {1, 1}, LandUse::Agriculture, 10, 5, 0);
  s.landscape.parcels[0].land_use = LandUse::Conservation;
  s.rules.obligation = 10;
  const GameState before = s;
  try {
    apply_land_use_change(s, 1, 0, LandUse::Agriculture);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WouldViolateOwnObligation);
  }
  EXPECT_EQ(s, before);
}

TEST(LandUseChange, ErrorsAndNoOp) {
  GameState s = grid_state(2, 1, {1, 2}, LandUse::Conservation, 10, 5, 0);
  try {
    apply_land_use_change(s, 1, 1, LandUse::Agriculture);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotOwner);
  }
  EXPECT_EQ(apply_land_use_change(s, 1, 0, LandUse::Conservation), ChangeOutcome::NoOp);
  EXPECT_THROW(apply_land_use_change(s, 1, 5, LandUse::Agriculture), Error);
  s.phase = Phase::Finished;
  try {
    apply_land_use_change(s, 1, 0, LandUse::Agriculture);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GameNotRunning);
  }
}

TEST(LandUseChange, NeighborLosesBonusPerAffectedParcel) {
  // Row: A B B. A's parcel 0 borders B's parcel 1 only (VonNeumann).
  GameState s = grid_state(3, 1, {1, 2, 2}, LandUse::Conservation, 5, 3, 2);
  s.rules.neighborhood = Neighborhood::VonNeumann4;
  const Ecopoints before = player_production(s, 2);
  EXPECT_EQ(apply_land_use_change(s, 1, 0, LandUse::Agriculture), ChangeOutcome::Applied);
  EXPECT_EQ(player_production(s, 2), before - 2);
  EXPECT_EQ(player_production(s, 2), oracle::production(s, 2));
}

TEST(LandUseChange, MayPushOthersBelowObligation) {
  // Row: A B A. A has slack on parcel 2; dropping parcel 0 costs B its bonus.
  GameState s = grid_state(3, 1, {1, 2, 1}, LandUse::Conservation, 20, 3, 10);
  s.landscape.parcels[2].base_credit = 50;
  s.rules.obligation = 40;
  ASSERT_EQ(effective_balance(s, 2), 40);
  EXPECT_EQ(apply_land_use_change(s, 1, 0, LandUse::Agriculture), ChangeOutcome::Applied);
  EXPECT_EQ(effective_balance(s, 1), 60);
  EXPECT_EQ(effective_balance(s, 2), 30);
  EXPECT_EQ(shortfall(s, 2), 10);
}

TEST(AccrueTick, RevenueOnly) {
  GameState s = grid_state(1, 1, {1}, LandUse::Agriculture, 0, 5, 0);
  const TickSummary t = accrue_tick(s);
  EXPECT_EQ(s.players[0].cash, 5);
  EXPECT_EQ(t.tick, 1);
  EXPECT_EQ(s.tick, 1);
}

TEST(AccrueTick, PenaltyOnShortfall) {
  GameState s = grid_state(1, 1, {1}, LandUse::Conservation, 3, 5, 0);
  s.rules.obligation = 5;
  s.rules.penalty_rate = 3;
  const TickSummary t = accrue_tick(s);
  EXPECT_EQ(s.players[0].cash, -6);
  EXPECT_EQ(t.entries[0].shortfall, 2);
  EXPECT_EQ(t.entries[0].penalty, 6);
}

TEST(AccrueTick, TouchesOnlyCashTickAndPhase) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    GameState s = oracle::random_state(rng, 6, 3, Neighborhood::Moore8, 1);
    s.rules.obligation = 20;
    s.rules.penalty_rate = 2;
    s.rules.total_ticks = 2;
    s.players[1].net_traded = 3;
    GameState before = s;
    accrue_tick(s);
    EXPECT_EQ(s.landscape, before.landscape);
    for (std::size_t i = 0; i < s.players.size(); ++i) {
      EXPECT_EQ(s.players[i].net_traded, before.players[i].net_traded);
      EXPECT_EQ(s.players[i].owned_parcels, before.players[i].owned_parcels);
    }
    EXPECT_EQ(s.phase, Phase::Running);
    accrue_tick(s);
    EXPECT_EQ(s.phase, Phase::Finished);
    EXPECT_THROW(accrue_tick(s), Error);
  }
}

TEST(AccrueTick, ScriptedTenTickGameMatchesAccountingOracle) {
  GameRules r;
  r.width = 5;
  r.height = 4;
  r.obligation = 18;
  r.penalty_rate = 4;
  r.bonus_weight = 1;
  r.total_ticks = 10;
  r.initial_cash = 50;
  r.allocation_mode = AllocationMode::Interleaved;
  r.landscape_seed = 77;
  const std::vector<PlayerSeat> seats{{1, "a"}, {2, "b"}};
  GameState s = start_game(r, seats);
  std::vector<Money> expected{50, 50};
  std::mt19937_64 rng(1);
  for (int tick = 0; tick < 10; ++tick) {
    // Scripted: each tick both players try a random flip of an own parcel.
    for (std::size_t pi = 0; pi < 2; ++pi) {
      const PlayerState& p = s.players[pi];
      std::uniform_int_distribution<std::size_t> pick(0, p.owned_parcels.size() - 1);
      const ParcelId id = p.owned_parcels[pick(rng)];
      const LandUse to = s.landscape.parcels[id].land_use == LandUse::Agriculture ? LandUse::Conservation
                                                                                  : LandUse::Agriculture;
      try {
        apply_land_use_change(s, p.player_id, id, to);
      } catch (const Error&) {
      }
    }
    for (std::size_t pi = 0; pi < 2; ++pi) {
      const PlayerId id = s.players[pi].player_id;
      const auto short_by = std::max<std::int64_t>(0, r.obligation - oracle::balance(s, id));
      expected[pi] += oracle::agri_revenue(s, id) - r.penalty_rate * short_by;
    }
    accrue_tick(s);
  }
  EXPECT_EQ(s.phase, Phase::Finished);
  EXPECT_EQ(s.players[0].cash, expected[0]);
  EXPECT_EQ(s.players[1].cash, expected[1]);
  const auto scores = final_scores(s);
  const PlayerId leader = expected[0] >= expected[1] ? 1 : 2;
  EXPECT_EQ(scores.front().player_id, leader);
}

TEST(FinalScores, OrderingAndErrors) {
  GameState s = grid_state(2, 1, {1, 2}, LandUse::Agriculture, 0, 0, 0);
  EXPECT_THROW(final_scores(s), Error);
  s.phase = Phase::Finished;
  s.players[0].cash = 10;
  s.players[1].cash = 10;
  auto scores = final_scores(s);
  EXPECT_EQ(scores[0].player_id, 1);
  EXPECT_EQ(scores[1].player_id, 2);
  s.players[1].cash = 11;
  scores = final_scores(s);
  EXPECT_EQ(scores[0].player_id, 2);

  GameState one = grid_state(1, 1, {4}, LandUse::Agriculture, 0, 0, 0);
  one.phase = Phase::Finished;
  EXPECT_EQ(final_scores(one).front().player_id, 4);
}

TEST(StartGame, OwnershipPartitionsLandscape) {
  GameRules r;
  r.width = 7;
  r.height = 3;
  r.allocation_mode = AllocationMode::Blocks;
  const std::vector<PlayerSeat> seats{{1, "a"}, {2, "b"}, {3, "c"}};
  const GameState s = start_game(r, seats);
  std::set<ParcelId> all;
  std::size_t total = 0;
  for (const PlayerState& p : s.players) {
    total += p.owned_parcels.size();
    all.insert(p.owned_parcels.begin(), p.owned_parcels.end());
    EXPECT_FALSE(p.owned_parcels.empty());
    EXPECT_EQ(p.cash, r.initial_cash);
  }
  EXPECT_EQ(total, 21u);
  EXPECT_EQ(all.size(), 21u);
}

TEST(Rules, Validation) {
  GameRules r;
  EXPECT_NO_THROW(validate(r));
  r.width = 0;
  EXPECT_THROW(validate(r), Error);
  r = {};
  r.tick_seconds = 0;
  EXPECT_THROW(validate(r), Error);
  r = {};
  r.agri_revenue_range = {5, 1};
  EXPECT_THROW(validate(r), Error);
}
