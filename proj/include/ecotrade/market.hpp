#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "ecotrade/core.hpp"

namespace ecotrade {

using OfferId = std::int64_t;

enum class Side : std::uint8_t { Sell, Buy };
enum class OfferStatus : std::uint8_t { Open, Cancelled, Filled };

template <>
struct EnumNames<Side> {
  static constexpr std::array<std::string_view, 2> names = {"Sell", "Buy"};
};
template <>
struct EnumNames<OfferStatus> {
  static constexpr std::array<std::string_view, 3> names = {"Open", "Cancelled", "Filled"};
};

struct Offer {
  OfferId offer_id = 0;
  PlayerId maker = 0;
  Side side = Side::Sell;
  Ecopoints quantity = 0;  // remaining
  Money unit_price = 0;
  OfferStatus status = OfferStatus::Open;

  bool operator==(const Offer&) const = default;
};

struct Trade {
  std::int64_t trade_id = 0;
  OfferId offer_id = 0;
  PlayerId seller = 0;
  PlayerId buyer = 0;
  Ecopoints quantity = 0;
  Money unit_price = 0;
  std::int64_t tick_at = 0;
  std::int64_t seq = 0;

  bool operator==(const Trade&) const = default;
};

struct PricePoint {
  std::int64_t seq = 0;
  std::int64_t tick_at = 0;
  Money unit_price = 0;
  Ecopoints quantity = 0;
  bool operator==(const PricePoint&) const = default;
};

/// Manual-acceptance order book. Offers are never erased, so offer_id is
/// always index + 1 and the full history stays part of the state.
struct Market {
  std::vector<Offer> offers;
  std::vector<Trade> trades;

  bool operator==(const Market&) const = default;

  OfferId next_offer_id() const { return static_cast<OfferId>(offers.size()) + 1; }
  std::int64_t next_trade_seq() const { return static_cast<std::int64_t>(trades.size()) + 1; }

  const Offer* find(OfferId id) const {
    if (id < 1 || id > static_cast<OfferId>(offers.size())) return nullptr;
    return &offers[static_cast<std::size_t>(id - 1)];
  }
  Offer* find(OfferId id) { return const_cast<Offer*>(std::as_const(*this).find(id)); }

  std::vector<Offer> open_offers() const {
    std::vector<Offer> out;
    std::copy_if(offers.begin(), offers.end(), std::back_inserter(out),
                 [](const Offer& o) { return o.status == OfferStatus::Open; });
    return out;
  }
};

/// Posting reserves nothing; whether the seller can deliver is decided when
/// the offer is accepted.
inline OfferId post_offer(const GameState& state, Market& market, PlayerId maker, Side side,
                          Ecopoints quantity, Money unit_price) {
  if (state.phase != Phase::Running) throw Error(ErrorCode::GameNotRunning);
  state.player(maker);
  if (quantity < 1 || quantity > kMaxValue) {
    throw Error(ErrorCode::BadQuantity, "quantity " + std::to_string(quantity));
  }
  if (unit_price < 0 || unit_price > kMaxValue) {
    throw Error(ErrorCode::BadPrice, "unit_price " + std::to_string(unit_price));
  }
  const OfferId id = market.next_offer_id();
  market.offers.push_back(Offer{id, maker, side, quantity, unit_price, OfferStatus::Open});
  return id;
}

inline void cancel_offer(const GameState& state, Market& market, PlayerId player, OfferId id) {
  if (state.phase != Phase::Running) throw Error(ErrorCode::GameNotRunning);
  Offer* offer = market.find(id);
  if (offer == nullptr) throw Error(ErrorCode::UnknownOffer, "offer " + std::to_string(id));
  if (offer->maker != player) throw Error(ErrorCode::NotMaker, "offer " + std::to_string(id));
  if (offer->status != OfferStatus::Open) throw Error(ErrorCode::NotOpen, "offer " + std::to_string(id));
  offer->status = OfferStatus::Cancelled;
}

/// Executes (part of) an offer. The seller - the maker of a Sell offer or
/// the taker of a Buy offer - must still meet the obligation afterwards.
inline Trade accept_offer(GameState& state, Market& market, PlayerId taker, OfferId id,
                          Ecopoints quantity) {
  if (state.phase != Phase::Running) throw Error(ErrorCode::GameNotRunning);
  Offer* offer = market.find(id);
  if (offer == nullptr) throw Error(ErrorCode::UnknownOffer, "offer " + std::to_string(id));
  if (offer->status != OfferStatus::Open) throw Error(ErrorCode::NotOpen, "offer " + std::to_string(id));
  if (offer->maker == taker) throw Error(ErrorCode::SelfTrade);
  state.player(taker);
  if (quantity < 1 || quantity > offer->quantity) {
    throw Error(ErrorCode::BadQuantity, "quantity " + std::to_string(quantity) + " of " +
                                            std::to_string(offer->quantity));
  }
  const PlayerId seller = offer->side == Side::Sell ? offer->maker : taker;
  const PlayerId buyer = offer->side == Side::Sell ? taker : offer->maker;

  const Ecopoints after = effective_balance(state, seller) - quantity;
  if (after < state.rules.obligation) {
    throw Error(ErrorCode::SellerBelowObligation,
                "seller balance would be " + std::to_string(after) + " against obligation " +
                    std::to_string(state.rules.obligation));
  }

  PlayerState& s = state.player(seller);
  PlayerState& b = state.player(buyer);
  const Money amount = quantity * offer->unit_price;
  s.net_traded -= quantity;
  b.net_traded += quantity;
  s.cash += amount;
  b.cash -= amount;
  offer->quantity -= quantity;
  if (offer->quantity == 0) offer->status = OfferStatus::Filled;

  const std::int64_t seq = market.next_trade_seq();
  Trade trade{seq, id, seller, buyer, quantity, offer->unit_price, state.tick, seq};
  market.trades.push_back(trade);
  return trade;
}

inline std::vector<PricePoint> price_series(const Market& market) {
  std::vector<PricePoint> out;
  out.reserve(market.trades.size());
  for (const Trade& t : market.trades) out.push_back({t.seq, t.tick_at, t.unit_price, t.quantity});
  return out;
}

/// Authoritative game state plus order book: what the digest covers.
struct World {
  GameState state;
  Market market;
  bool operator==(const World&) const = default;
};

}  // namespace ecotrade
