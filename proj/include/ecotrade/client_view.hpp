#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecotrade/digest.hpp"
#include "ecotrade/protocol.hpp"
#include "ecotrade/snapshot.hpp"

namespace ecotrade {

/// Client-side mirror of one session, rebuilt purely from server messages.
/// Deltas are checked against locally recomputed values; any disagreement or
/// a server_seq gap sets needs_resync until a fresh snapshot arrives.
class ClientView {
 public:
  void apply(const protocol::ServerMessage& message) {
    if (last_server_seq_ != 0 && message.server_seq != last_server_seq_ + 1) needs_resync_ = true;
    last_server_seq_ = message.server_seq;
    std::visit([this](const auto& m) { on(m); }, message.payload);
  }

  std::optional<PlayerId> self() const { return self_; }
  std::optional<protocol::GameId> game_id() const { return game_id_; }
  bool has_snapshot() const { return has_snapshot_; }
  bool needs_resync() const { return needs_resync_; }
  const World& world() const { return world_; }
  std::int64_t last_server_seq() const { return last_server_seq_; }
  const std::vector<PlayerSeat>& lobby() const { return lobby_; }
  const std::vector<protocol::ErrorReply>& errors() const { return errors_; }
  const std::vector<protocol::ChatRelay>& chat() const { return chat_; }
  const std::vector<protocol::TickReport>& tick_reports() const { return ticks_; }
  const std::optional<protocol::GameOver>& game_over() const { return game_over_; }
  std::uint64_t digest() const { return ecotrade::digest(world_); }

 private:
  void on(const protocol::Welcome& m) { self_ = m.player_id; }
  void on(const protocol::GameCreated& m) { game_id_ = m.game_id; }
  void on(const protocol::LobbyUpdate& m) {
    game_id_ = m.game_id;
    lobby_ = m.players;
  }
  void on(const protocol::GameStarted& m) {
    game_id_ = m.snapshot.game_id;
    world_ = protocol::world_from_snapshot(m.snapshot);
    has_snapshot_ = true;
    needs_resync_ = false;
  }
  void on(const protocol::ParcelChanged& m) {
    if (!has_snapshot_ || !world_.state.landscape.contains(m.parcel_id)) {
      needs_resync_ = true;
      return;
    }
    world_.state.landscape.at(m.parcel_id).land_use = m.use;
    if (protocol::credit_values_around(world_, m.parcel_id) != m.affected_credit_values) needs_resync_ = true;
  }
  void on(const protocol::BalancesUpdate& m) {
    if (!has_snapshot_) return;
    for (const protocol::Balance& b : m.balances) {
      PlayerState* p = world_.state.find_player(b.player_id);
      if (p == nullptr) {
        needs_resync_ = true;
        continue;
      }
      if (p->cash != b.cash || p->net_traded != b.net_traded ||
          player_production(world_.state, b.player_id) != b.production) {
        needs_resync_ = true;
      }
      p->cash = b.cash;
      p->net_traded = b.net_traded;
    }
  }
  void on(const protocol::TickReport& m) {
    ticks_.push_back(m);
    if (!has_snapshot_) return;
    for (const protocol::TickLine& line : m.reports) {
      if (PlayerState* p = world_.state.find_player(line.player_id)) p->cash += line.revenue - line.penalty;
    }
    world_.state.tick = m.tick;
    if (world_.state.tick >= world_.state.rules.total_ticks) world_.state.phase = Phase::Finished;
  }
  void on(const protocol::OfferPosted& m) {
    if (m.offer.offer_id != world_.market.next_offer_id()) {
      needs_resync_ = true;
      return;
    }
    world_.market.offers.push_back(m.offer);
  }
  void on(const protocol::OfferCancelled& m) {
    if (Offer* o = world_.market.find(m.offer_id)) {
      o->status = OfferStatus::Cancelled;
    } else {
      needs_resync_ = true;
    }
  }
  void on(const protocol::TradeExecuted& m) {
    const Trade& t = m.trade;
    Offer* o = world_.market.find(t.offer_id);
    PlayerState* seller = world_.state.find_player(t.seller);
    PlayerState* buyer = world_.state.find_player(t.buyer);
    if (o == nullptr || seller == nullptr || buyer == nullptr || o->quantity < t.quantity) {
      needs_resync_ = true;
      return;
    }
    o->quantity -= t.quantity;
    if (o->quantity == 0) o->status = OfferStatus::Filled;
    seller->net_traded -= t.quantity;
    buyer->net_traded += t.quantity;
    seller->cash += t.quantity * t.unit_price;
    buyer->cash -= t.quantity * t.unit_price;
    world_.market.trades.push_back(t);
  }
  void on(const protocol::ChatRelay& m) { chat_.push_back(m); }
  void on(const protocol::GameOver& m) {
    game_over_ = m;
    world_.state.phase = Phase::Finished;
  }
  void on(const protocol::ErrorReply& m) { errors_.push_back(m); }

  std::optional<PlayerId> self_;
  std::optional<protocol::GameId> game_id_;
  std::vector<PlayerSeat> lobby_;
  World world_;
  bool has_snapshot_ = false;
  bool needs_resync_ = false;
  std::int64_t last_server_seq_ = 0;
  std::vector<protocol::ErrorReply> errors_;
  std::vector<protocol::ChatRelay> chat_;
  std::vector<protocol::TickReport> ticks_;
  std::optional<protocol::GameOver> game_over_;
};

}  // namespace ecotrade
