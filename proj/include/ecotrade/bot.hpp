#pragma once

// Greedy computer player. Pure functions of (world view, bot id, config);
// the network loop that feeds them lives in the bot client.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ecotrade/market.hpp"
#include "ecotrade/protocol.hpp"

namespace ecotrade::bot {

struct BotConfig {
  std::int64_t decision_period_ms = 1000;
  std::int64_t markup_percent = 10;
  Money reserve_price = 5;
};

inline void validate(const BotConfig& c) {
  if (c.decision_period_ms < 100) throw Error(ErrorCode::BadValue, "decision period must be >= 100 ms", "period-ms");
  if (c.markup_percent < 0 || c.markup_percent > 10'000) {
    throw Error(ErrorCode::BadValue, "markup must be in [0, 10000]", "markup");
  }
  if (c.reserve_price < 0 || c.reserve_price > kMaxValue) {
    throw Error(ErrorCode::BadValue, "reserve price out of range", "reserve");
  }
}

using Action = protocol::ClientPayload;

/// Change of `self`'s effective balance if the parcel flipped use, all else
/// fixed: the parcel's own credits plus one bonus per conserved neighbor
/// that `self` owns.
inline Ecopoints own_balance_delta(const GameState& s, PlayerId self, const Parcel& p) {
  std::int64_t own_conserved = 0;
  std::int64_t any_conserved = 0;
  for_each_neighbor(s.landscape, s.rules.neighborhood, p.coord, [&](const Parcel& n) {
    if (n.land_use != LandUse::Conservation) return;
    ++any_conserved;
    if (n.owner == self) ++own_conserved;
  });
  const Ecopoints own_credits = p.base_credit + s.rules.bonus_weight * any_conserved;
  const Ecopoints swing = own_credits + s.rules.bonus_weight * own_conserved;
  return p.land_use == LandUse::Conservation ? -swing : swing;
}

inline bool flip_accepted(const GameState& s, PlayerId self, const Parcel& p) {
  return effective_balance(s, self) + own_balance_delta(s, self, p) >= s.rules.obligation;
}

/// Per-tick cash change if the parcel flipped, holding everything else
/// fixed: revenue gained or forgone, minus the change in penalty.
inline Money marginal_value(const World& world, PlayerId self, ParcelId parcel_id) {
  const GameState& s = world.state;
  const Parcel& p = s.landscape.at(parcel_id);
  if (p.owner != self) throw Error(ErrorCode::NotOwner, "parcel " + std::to_string(parcel_id));
  const Ecopoints balance = effective_balance(s, self);
  const Ecopoints after = balance + own_balance_delta(s, self, p);
  const Ecopoints short_before = std::max<Ecopoints>(0, s.rules.obligation - balance);
  const Ecopoints short_after = std::max<Ecopoints>(0, s.rules.obligation - after);
  const Money revenue = p.land_use == LandUse::Conservation ? p.agri_revenue : -p.agri_revenue;
  return revenue - s.rules.penalty_rate * (short_after - short_before);
}

// ---------------------------------------------------------------------------
// Cheapest conservation set.

struct ConservationPlan {
  std::vector<bool> conserve;  // aligned with the owned parcel list, ascending id
  Money forgone_revenue = 0;
};

// DP tables above this many cells are skipped; the bot then relies on
// single-parcel improvements only.
inline constexpr std::int64_t kMaxPlanCells = 4'000'000;

/// Minimum-forgone-revenue set of own parcels whose credits cover
/// obligation - net_traded. Credits count the base value plus bonuses from
/// conserved neighbors owned by others; bonuses between own parcels are left
/// out, so the plan stays feasible once realized. Among optimal sets the one
/// that leaves the lowest-id parcels in agriculture wins.
inline std::optional<ConservationPlan> cheapest_conservation(const GameState& s, PlayerId self) {
  const PlayerState& me = s.player(self);
  const std::vector<ParcelId>& owned = me.owned_parcels;
  const auto n = static_cast<std::int64_t>(owned.size());
  std::vector<Ecopoints> credit(owned.size());
  Ecopoints total_credit = 0;
  for (std::size_t i = 0; i < owned.size(); ++i) {
    const Parcel& p = s.landscape.at(owned[i]);
    std::int64_t foreign = 0;
    for_each_neighbor(s.landscape, s.rules.neighborhood, p.coord, [&](const Parcel& nb) {
      if (nb.owner != self && nb.land_use == LandUse::Conservation) ++foreign;
    });
    credit[i] = p.base_credit + s.rules.bonus_weight * foreign;
    total_credit += credit[i];
  }
  const Ecopoints need = std::max<Ecopoints>(0, s.rules.obligation - me.net_traded);
  if (need > total_credit) return std::nullopt;
  if ((n + 1) * (need + 1) > kMaxPlanCells) return std::nullopt;

  constexpr Money kInf = std::numeric_limits<Money>::max() / 4;
  const auto width = static_cast<std::size_t>(need + 1);
  // best[i][c]: least revenue forgone using parcels i.. to cover c more credits.
  std::vector<Money> best((owned.size() + 1) * width, kInf);
  auto at = [&](std::size_t i, Ecopoints c) -> Money& { return best[i * width + static_cast<std::size_t>(c)]; };
  at(owned.size(), 0) = 0;
  for (std::size_t i = owned.size(); i-- > 0;) {
    const Money rev = s.landscape.at(owned[i]).agri_revenue;
    for (Ecopoints c = 0; c <= need; ++c) {
      const Money skip = at(i + 1, c);
      const Money rest = at(i + 1, std::max<Ecopoints>(0, c - credit[i]));
      const Money take = rest >= kInf ? kInf : rest + rev;
      at(i, c) = std::min(skip, take);
    }
  }
  ConservationPlan plan;
  plan.conserve.assign(owned.size(), false);
  plan.forgone_revenue = at(0, need);
  Ecopoints c = need;
  for (std::size_t i = 0; i < owned.size(); ++i) {
    if (at(i + 1, c) == at(i, c)) continue;
    plan.conserve[i] = true;
    c = std::max<Ecopoints>(0, c - credit[i]);
  }
  return plan;
}

// ---------------------------------------------------------------------------

namespace detail {

inline Money forgone_revenue(const GameState& s, const PlayerState& me) {
  Money total = 0;
  for (ParcelId id : me.owned_parcels) {
    const Parcel& p = s.landscape.at(id);
    if (p.land_use == LandUse::Conservation) total += p.agri_revenue;
  }
  return total;
}

inline std::optional<Action> relieve_shortfall(const World& world, PlayerId self, Ecopoints short_by) {
  const GameState& s = world.state;
  using Wide = __int128;
  const Wide bound = Wide{s.rules.penalty_rate} * short_by * (s.rules.total_ticks - s.tick);
  const Offer* pick = nullptr;
  Ecopoints pick_qty = 0;
  for (const Offer& o : world.market.offers) {
    if (o.status != OfferStatus::Open || o.side != Side::Sell || o.maker == self) continue;
    const Ecopoints qty = std::min(o.quantity, short_by);
    if (Wide{qty} * o.unit_price >= bound) continue;
    if (s.find_player(o.maker) == nullptr) continue;
    if (effective_balance(s, o.maker) - qty < s.rules.obligation) continue;
    if (pick == nullptr || o.unit_price < pick->unit_price) {
      pick = &o;
      pick_qty = qty;
    }
  }
  if (pick != nullptr) return protocol::AcceptOffer{pick->offer_id, pick_qty};

  // Otherwise conserve the agricultural parcel with the best credit gain per
  // unit of revenue lost, among flips the server would accept.
  const Parcel* best = nullptr;
  Ecopoints best_gain = 0;
  for (ParcelId id : s.player(self).owned_parcels) {
    const Parcel& p = s.landscape.at(id);
    if (p.land_use != LandUse::Agriculture) continue;
    const Ecopoints gain = own_balance_delta(s, self, p);
    if (gain <= 0 || !flip_accepted(s, self, p)) continue;
    // gain / revenue, compared by cross-multiplication; zero revenue ranks first.
    const bool better =
        best == nullptr || Wide{gain} * best->agri_revenue > Wide{best_gain} * p.agri_revenue;
    if (better) {
      best = &p;
      best_gain = gain;
    }
  }
  if (best != nullptr) return protocol::SetLandUse{best->parcel_id, LandUse::Conservation};
  return std::nullopt;
}

inline std::optional<Action> move_toward_plan(const GameState& s, PlayerId self) {
  const PlayerState& me = s.player(self);
  const auto plan = cheapest_conservation(s, self);
  if (!plan) return std::nullopt;
  std::vector<bool> current(me.owned_parcels.size());
  for (std::size_t i = 0; i < me.owned_parcels.size(); ++i) {
    current[i] = s.landscape.at(me.owned_parcels[i]).land_use == LandUse::Conservation;
  }
  const Money now = forgone_revenue(s, me);
  const bool better = plan->forgone_revenue < now ||
                      (plan->forgone_revenue == now && plan->conserve < current);
  if (!better) return std::nullopt;
  // Conserve missing parcels first so the balance never dips, then release.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < current.size(); ++i) {
      const bool add = pass == 0 && plan->conserve[i] && !current[i];
      const bool drop = pass == 1 && !plan->conserve[i] && current[i];
      if (!add && !drop) continue;
      const Parcel& p = s.landscape.at(me.owned_parcels[i]);
      if (!flip_accepted(s, self, p)) return std::nullopt;
      return protocol::SetLandUse{p.parcel_id, add ? LandUse::Conservation : LandUse::Agriculture};
    }
  }
  return std::nullopt;
}

inline std::optional<Action> best_single_flip(const World& world, PlayerId self) {
  const GameState& s = world.state;
  const Parcel* best = nullptr;
  Money best_value = 0;
  for (ParcelId id : s.player(self).owned_parcels) {
    const Parcel& p = s.landscape.at(id);
    const Money value = marginal_value(world, self, id);
    if (value <= best_value || !flip_accepted(s, self, p)) continue;
    best = &p;
    best_value = value;
  }
  if (best == nullptr) return std::nullopt;
  const LandUse to = best->land_use == LandUse::Conservation ? LandUse::Agriculture : LandUse::Conservation;
  return protocol::SetLandUse{best->parcel_id, to};
}

}  // namespace detail

/// Asking price for surplus credits: last trade price marked up, rounded
/// down, or the reserve price before any trade.
inline Money ask_price(const Market& market, const BotConfig& config) {
  if (market.trades.empty()) return std::min(config.reserve_price, kMaxValue);
  return std::min(kMaxValue, market.trades.back().unit_price * (100 + config.markup_percent) / 100);
}

/// Deterministic priorities:
///  1. in shortfall: buy the cheapest sufficient ask worth less than the
///     penalties it avoids, else conserve the best credit-per-revenue parcel;
///  2. move toward the cheapest conservation set if it beats the current one;
///  3. make the most valuable single flip with positive marginal value;
///  4. withdraw an own ask the surplus no longer covers;
///  5. with surplus and no own ask: offer the whole surplus;
///  6. otherwise nothing.
/// Only actions the server would accept against `world` are returned.
inline std::optional<Action> plan_action(const World& world, PlayerId self, const BotConfig& config) {
  const GameState& s = world.state;
  if (s.phase != Phase::Running || s.find_player(self) == nullptr) return std::nullopt;
  try {
    const Ecopoints balance = effective_balance(s, self);
    const Ecopoints short_by = s.rules.obligation - balance;
    if (short_by > 0) return detail::relieve_shortfall(world, self, short_by);

    if (auto a = detail::move_toward_plan(s, self)) return a;
    if (auto a = detail::best_single_flip(world, self)) return a;

    const Ecopoints surplus = -short_by;
    const Offer* own_ask = nullptr;
    for (const Offer& o : world.market.offers) {
      if (o.status == OfferStatus::Open && o.maker == self && o.side == Side::Sell) {
        if (o.quantity > surplus) return protocol::CancelOffer{o.offer_id};
        own_ask = &o;
      }
    }
    if (surplus > 0 && own_ask == nullptr) {
      return protocol::PostOffer{Side::Sell, std::min(surplus, kMaxValue), ask_price(world.market, config)};
    }
  } catch (const Error&) {
    // Inconsistent view: sit this period out.
  }
  return std::nullopt;
}

}  // namespace ecotrade::bot
