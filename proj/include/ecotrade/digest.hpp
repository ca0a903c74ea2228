#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "ecotrade/market.hpp"

namespace ecotrade {

/// FNV-1a over a canonical, field-ordered byte stream. Integers are fed as
/// 8 little-endian bytes and strings are length-prefixed, so the value does
/// not depend on host endianness or struct layout.
class DigestWriter {
 public:
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u64(s.size());
    for (char c : s) byte(static_cast<std::uint8_t>(c));
  }
  template <class E>
    requires std::is_enum_v<E>
  void enumeration(E e) {
    u64(static_cast<std::uint64_t>(e));
  }
  void raw(std::string_view bytes) {
    for (char c : bytes) byte(static_cast<std::uint8_t>(c));
  }

  std::uint64_t value() const { return hash_; }

 private:
  void byte(std::uint8_t b) {
    hash_ ^= b;
    hash_ *= 0x00000100000001b3ull;
  }
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

inline void feed(DigestWriter& w, const GameRules& r) {
  w.i64(r.width);
  w.i64(r.height);
  w.enumeration(r.neighborhood);
  w.i64(r.bonus_weight);
  w.i64(r.obligation);
  w.i64(r.penalty_rate);
  w.i64(r.tick_seconds);
  w.i64(r.total_ticks);
  w.i64(r.base_credit_range.min);
  w.i64(r.base_credit_range.max);
  w.i64(r.agri_revenue_range.min);
  w.i64(r.agri_revenue_range.max);
  w.i64(r.initial_cash);
  w.enumeration(r.allocation_mode);
  w.u64(r.landscape_seed);
}

inline void feed(DigestWriter& w, const GameState& s) {
  feed(w, s.rules);
  w.i64(s.landscape.width);
  w.i64(s.landscape.height);
  w.u64(s.landscape.parcels.size());
  for (const Parcel& p : s.landscape.parcels) {
    w.i64(p.parcel_id);
    w.i64(p.coord.row);
    w.i64(p.coord.col);
    w.i64(p.owner);
    w.enumeration(p.land_use);
    w.i64(p.base_credit);
    w.i64(p.agri_revenue);
  }
  w.u64(s.players.size());
  for (const PlayerState& p : s.players) {
    w.i64(p.player_id);
    w.str(p.name);
    w.i64(p.cash);
    w.i64(p.net_traded);
    w.u64(p.owned_parcels.size());
    for (ParcelId id : p.owned_parcels) w.i64(id);
  }
  w.i64(s.tick);
  w.enumeration(s.phase);
}

inline void feed(DigestWriter& w, const Market& m) {
  w.u64(m.offers.size());
  for (const Offer& o : m.offers) {
    w.i64(o.offer_id);
    w.i64(o.maker);
    w.enumeration(o.side);
    w.i64(o.quantity);
    w.i64(o.unit_price);
    w.enumeration(o.status);
  }
  w.u64(m.trades.size());
  for (const Trade& t : m.trades) {
    w.i64(t.trade_id);
    w.i64(t.offer_id);
    w.i64(t.seller);
    w.i64(t.buyer);
    w.i64(t.quantity);
    w.i64(t.unit_price);
    w.i64(t.tick_at);
    w.i64(t.seq);
  }
}

inline std::uint64_t digest(const World& world) {
  DigestWriter w;
  feed(w, world.state);
  feed(w, world.market);
  return w.value();
}

inline std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::uint64_t fnv1a(std::string_view bytes) {
  DigestWriter w;
  w.raw(bytes);
  return w.value();
}

}  // namespace ecotrade
