#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "ecotrade/protocol.hpp"

namespace ecotrade::protocol {

inline std::vector<Balance> balances(const World& world) {
  std::vector<Balance> out;
  out.reserve(world.state.players.size());
  for (const PlayerState& p : world.state.players) {
    const Ecopoints production = player_production(world.state, p.player_id);
    out.push_back({p.player_id, production, p.net_traded, p.cash});
  }
  return out;
}

/// Credit values of a parcel and its neighbors, ascending parcel id: the
/// set whose values can change when that parcel flips.
inline std::vector<CreditValue> credit_values_around(const World& world, ParcelId id) {
  const Landscape& land = world.state.landscape;
  const GameRules& rules = world.state.rules;
  const Coord c = land.at(id).coord;
  std::vector<CreditValue> out;
  out.push_back({id, parcel_credits(land, c, rules)});
  for_each_neighbor(land, rules.neighborhood, c, [&](const Parcel& n) {
    out.push_back({n.parcel_id, parcel_credits(land, n.coord, rules)});
  });
  std::sort(out.begin(), out.end(),
            [](const CreditValue& a, const CreditValue& b) { return a.parcel_id < b.parcel_id; });
  return out;
}

inline Snapshot make_snapshot(GameId game_id, const World& world) {
  Snapshot s;
  s.game_id = game_id;
  s.rules = world.state.rules;
  s.phase = world.state.phase;
  s.tick = world.state.tick;
  for (const PlayerState& p : world.state.players) {
    const Ecopoints production =
        world.state.landscape.parcels.empty() ? 0 : player_production(world.state, p.player_id);
    s.players.push_back({p.player_id, p.name, p.cash, p.net_traded, production});
  }
  s.parcels = world.state.landscape.parcels;
  s.offers = world.market.offers;
  s.trades = world.market.trades;
  return s;
}

/// Inverse of make_snapshot. Rejects snapshots that are not internally
/// consistent (Error{BadValue}).
inline World world_from_snapshot(const Snapshot& s) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::BadValue, what, "snapshot"); };
  World w;
  w.state.rules = s.rules;
  w.state.phase = s.phase;
  w.state.tick = s.tick;
  w.state.landscape.width = s.rules.width;
  w.state.landscape.height = s.rules.height;
  if (!s.parcels.empty() &&
      static_cast<std::int64_t>(s.parcels.size()) != s.rules.width * s.rules.height) {
    bad("parcel count does not match grid");
  }
  w.state.landscape.parcels = s.parcels;
  for (const PlayerSummary& p : s.players) {
    PlayerState ps;
    ps.player_id = p.player_id;
    ps.name = p.name;
    ps.cash = p.cash;
    ps.net_traded = p.net_traded;
    w.state.players.push_back(std::move(ps));
  }
  for (std::size_t i = 0; i < s.parcels.size(); ++i) {
    const Parcel& parcel = s.parcels[i];
    if (parcel.parcel_id != static_cast<ParcelId>(i)) bad("parcel ids must be row-major");
    const Coord expected{parcel.parcel_id / s.rules.width, parcel.parcel_id % s.rules.width};
    if (parcel.coord != expected) bad("parcel coord does not match id");
    PlayerState* owner = w.state.find_player(parcel.owner);
    if (owner == nullptr) bad("parcel owner is not a player");
    owner->owned_parcels.push_back(parcel.parcel_id);
  }
  for (std::size_t i = 0; i < s.offers.size(); ++i) {
    if (s.offers[i].offer_id != static_cast<OfferId>(i + 1)) bad("offer ids must be dense");
  }
  w.market.offers = s.offers;
  w.market.trades = s.trades;
  return w;
}

}  // namespace ecotrade::protocol
