#pragma once

// Event-sourced game session. Every state change of a session is a
// LoggedEvent; live play and replay both go through apply_event, so the
// action log alone reproduces the World bit for bit.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ecotrade/digest.hpp"
#include "ecotrade/protocol.hpp"
#include "ecotrade/snapshot.hpp"

namespace ecotrade {

using protocol::GameId;

// ---------------------------------------------------------------------------
// Event payloads.

struct PlayerJoinedEvent {
  static constexpr std::string_view kKind = "PlayerJoined";
  std::string name;
  bool is_bot = false;
  bool operator==(const PlayerJoinedEvent&) const = default;
};
struct PlayerLeftEvent {
  static constexpr std::string_view kKind = "PlayerLeft";
  bool operator==(const PlayerLeftEvent&) const = default;
};
struct GameStartedEvent {
  static constexpr std::string_view kKind = "GameStarted";
  std::vector<PlayerSeat> players;
  bool operator==(const GameStartedEvent&) const = default;
};
struct LandUseChangedEvent {
  static constexpr std::string_view kKind = "LandUseChanged";
  ParcelId parcel_id = 0;
  LandUse use = LandUse::Conservation;
  bool operator==(const LandUseChangedEvent&) const = default;
};
struct OfferPostedEvent {
  static constexpr std::string_view kKind = "OfferPosted";
  OfferId offer_id = 0;
  Side side = Side::Sell;
  Ecopoints quantity = 0;
  Money unit_price = 0;
  bool operator==(const OfferPostedEvent&) const = default;
};
struct OfferCancelledEvent {
  static constexpr std::string_view kKind = "OfferCancelled";
  OfferId offer_id = 0;
  bool operator==(const OfferCancelledEvent&) const = default;
};
struct TradeExecutedEvent {
  static constexpr std::string_view kKind = "TradeExecuted";
  OfferId offer_id = 0;
  Ecopoints quantity = 0;
  std::int64_t trade_id = 0;
  bool operator==(const TradeExecutedEvent&) const = default;
};
struct TickAccruedEvent {
  static constexpr std::string_view kKind = "TickAccrued";
  std::int64_t tick = 0;
  bool operator==(const TickAccruedEvent&) const = default;
};
struct ChatSentEvent {
  static constexpr std::string_view kKind = "ChatSent";
  std::string text;
  bool operator==(const ChatSentEvent&) const = default;
};
struct GameFinishedEvent {
  static constexpr std::string_view kKind = "GameFinished";
  bool operator==(const GameFinishedEvent&) const = default;
};

using EventPayload =
    std::variant<GameStartedEvent, LandUseChangedEvent, OfferPostedEvent, OfferCancelledEvent,
                 TradeExecutedEvent, TickAccruedEvent, ChatSentEvent, PlayerJoinedEvent,
                 PlayerLeftEvent, GameFinishedEvent>;

using protocol::Is;

template <class S, class V> requires Is<S, PlayerJoinedEvent>
void describe(S& e, V&& v) { v("name", e.name); v("is_bot", e.is_bot); }
template <class S, class V> requires Is<S, PlayerLeftEvent>
void describe(S&, V&&) {}
template <class S, class V> requires Is<S, GameStartedEvent>
void describe(S& e, V&& v) { v("players", e.players); }
template <class S, class V> requires Is<S, LandUseChangedEvent>
void describe(S& e, V&& v) { v("parcel_id", e.parcel_id); v("use", e.use); }
template <class S, class V> requires Is<S, OfferPostedEvent>
void describe(S& e, V&& v) {
  v("offer_id", e.offer_id);
  v("side", e.side);
  v("quantity", e.quantity);
  v("unit_price", e.unit_price);
}
template <class S, class V> requires Is<S, OfferCancelledEvent>
void describe(S& e, V&& v) { v("offer_id", e.offer_id); }
template <class S, class V> requires Is<S, TradeExecutedEvent>
void describe(S& e, V&& v) {
  v("offer_id", e.offer_id);
  v("quantity", e.quantity);
  v("trade_id", e.trade_id);
}
template <class S, class V> requires Is<S, TickAccruedEvent>
void describe(S& e, V&& v) { v("tick", e.tick); }
template <class S, class V> requires Is<S, ChatSentEvent>
void describe(S& e, V&& v) { v("text", e.text); }
template <class S, class V> requires Is<S, GameFinishedEvent>
void describe(S&, V&&) {}

struct LoggedEvent {
  std::int64_t seq = 0;  // dense from 1
  std::int64_t wall_clock_ms = 0;
  PlayerId actor = kSystemActor;
  EventPayload payload;
  // World digest after applying this event (as recorded live).
  std::optional<std::uint64_t> digest;

  bool operator==(const LoggedEvent&) const = default;

  std::string_view kind() const {
    return std::visit([](const auto& p) { return std::decay_t<decltype(p)>::kKind; }, payload);
  }
};

// ---------------------------------------------------------------------------
// Session state shared by live play and replay.

struct Member {
  PlayerId player_id = 0;
  std::string name;
  bool is_bot = false;
  bool operator==(const Member&) const = default;
};

/// One row of the per-tick results panel.
struct PanelRow {
  std::int64_t tick = 0;
  PlayerId player_id = 0;
  Money cash = 0;
  Ecopoints production = 0;
  Ecopoints net_traded = 0;
  Ecopoints shortfall = 0;
  Money penalty = 0;
  Money revenue = 0;
  bool operator==(const PanelRow&) const = default;
};

struct SessionState {
  GameId game_id = 0;
  GameRules rules;
  std::vector<Member> members;  // join order; the first is the creator
  World world;
  std::vector<PanelRow> panel;

  Phase phase() const { return world.state.phase; }
  std::optional<PlayerId> creator() const {
    if (members.empty()) return std::nullopt;
    return members.front().player_id;
  }
  const Member* find_member(PlayerId id) const {
    for (const Member& m : members) {
      if (m.player_id == id) return &m;
    }
    return nullptr;
  }
  std::vector<PlayerSeat> seats() const {
    std::vector<PlayerSeat> out;
    for (const Member& m : members) out.push_back({m.player_id, m.name});
    return out;
  }
};

/// A message produced by an event. No recipient means every member.
struct Outbound {
  std::optional<PlayerId> to;
  protocol::ServerPayload payload;
};

inline SessionState make_session_state(GameId game_id, const GameRules& rules) {
  SessionState s;
  s.game_id = game_id;
  s.rules = rules;
  s.world.state.rules = rules;
  s.world.state.phase = Phase::Lobby;
  return s;
}

namespace detail {

[[noreturn]] inline void inconsistent(const std::string& what) {
  throw Error(ErrorCode::CorruptLog, what);
}

inline protocol::ServerPayload balances_message(const World& w) {
  return protocol::BalancesUpdate{protocol::balances(w)};
}

struct EventApplier {
  SessionState& s;
  PlayerId actor;
  std::vector<Outbound> out;

  void require_member() const {
    if (s.find_member(actor) == nullptr) throw Error(ErrorCode::NotInGame, "player " + std::to_string(actor));
  }

  void operator()(const PlayerJoinedEvent& e) {
    if (s.phase() == Phase::Lobby) {
      if (s.find_member(actor) != nullptr) throw Error(ErrorCode::AlreadyInGame);
      for (const Member& m : s.members) {
        if (m.name == e.name) throw Error(ErrorCode::NameTaken, e.name);
      }
      s.members.push_back({actor, e.name, e.is_bot});
      out.push_back({std::nullopt, protocol::LobbyUpdate{s.game_id, s.seats()}});
      return;
    }
    // Rejoin of an existing seat after the game has started.
    const Member* m = s.find_member(actor);
    if (m == nullptr) throw Error(ErrorCode::AlreadyStarted);
    if (m->name != e.name) throw Error(ErrorCode::NameTaken, e.name);
    out.push_back({actor, protocol::GameStarted{protocol::make_snapshot(s.game_id, s.world)}});
  }

  void operator()(const PlayerLeftEvent&) {
    require_member();
    if (s.phase() != Phase::Lobby) return;  // seats persist once running
    std::erase_if(s.members, [&](const Member& m) { return m.player_id == actor; });
    out.push_back({std::nullopt, protocol::LobbyUpdate{s.game_id, s.seats()}});
  }

  void operator()(const GameStartedEvent& e) {
    if (s.phase() != Phase::Lobby) throw Error(ErrorCode::AlreadyStarted);
    if (e.players != s.seats()) inconsistent("GameStarted seats differ from lobby members");
    s.world.state = start_game(s.rules, e.players);
    s.world.market = Market{};
    out.push_back({std::nullopt, protocol::GameStarted{protocol::make_snapshot(s.game_id, s.world)}});
  }

  void operator()(const LandUseChangedEvent& e) {
    if (apply_land_use_change(s.world.state, actor, e.parcel_id, e.use) == ChangeOutcome::NoOp) {
      inconsistent("logged land-use change is a no-op");
    }
    out.push_back({std::nullopt, protocol::ParcelChanged{e.parcel_id, e.use,
                                                         protocol::credit_values_around(s.world, e.parcel_id)}});
    out.push_back({std::nullopt, balances_message(s.world)});
  }

  void operator()(const OfferPostedEvent& e) {
    if (e.offer_id != s.world.market.next_offer_id()) inconsistent("offer id out of sequence");
    const OfferId id = post_offer(s.world.state, s.world.market, actor, e.side, e.quantity, e.unit_price);
    out.push_back({std::nullopt, protocol::OfferPosted{*s.world.market.find(id)}});
  }

  void operator()(const OfferCancelledEvent& e) {
    cancel_offer(s.world.state, s.world.market, actor, e.offer_id);
    out.push_back({std::nullopt, protocol::OfferCancelled{e.offer_id}});
  }

  void operator()(const TradeExecutedEvent& e) {
    if (e.trade_id != s.world.market.next_trade_seq()) inconsistent("trade id out of sequence");
    const Trade trade = accept_offer(s.world.state, s.world.market, actor, e.offer_id, e.quantity);
    out.push_back({std::nullopt, protocol::TradeExecuted{trade}});
    out.push_back({std::nullopt, balances_message(s.world)});
  }

  void operator()(const TickAccruedEvent& e) {
    if (s.phase() == Phase::Running && e.tick != s.world.state.tick + 1) inconsistent("tick out of sequence");
    const TickSummary summary = accrue_tick(s.world.state);
    protocol::TickReport report{summary.tick, {}};
    for (const TickEntry& t : summary.entries) {
      report.reports.push_back({t.player_id, t.revenue, t.penalty, t.shortfall});
      s.panel.push_back({summary.tick, t.player_id, t.cash, t.production, t.net_traded,
                         t.shortfall, t.penalty, t.revenue});
    }
    out.push_back({std::nullopt, std::move(report)});
    out.push_back({std::nullopt, balances_message(s.world)});
  }

  void operator()(const ChatSentEvent& e) {
    require_member();
    out.push_back({std::nullopt, protocol::ChatRelay{actor, e.text}});
  }

  void operator()(const GameFinishedEvent&) {
    if (s.phase() != Phase::Finished) inconsistent("GameFinished before the last tick");
    out.push_back({std::nullopt, protocol::GameOver{final_scores(s.world.state)}});
  }
};

}  // namespace detail

/// Applies one event. Throws Error and leaves `state` unchanged if the event
/// is not valid in the current state.
inline std::vector<Outbound> apply_event(SessionState& state, const LoggedEvent& event) {
  detail::EventApplier applier{state, event.actor, {}};
  std::visit(applier, event.payload);
  return std::move(applier.out);
}

// ---------------------------------------------------------------------------
// Live session.

class Session {
 public:
  using Clock = std::function<std::int64_t()>;
  using EventSink = std::function<void(const LoggedEvent&)>;

  Session(GameId game_id, const GameRules& rules, Clock clock = system_clock_ms)
      : state_(make_session_state(game_id, rules)), clock_(std::move(clock)) {
    validate(rules);
  }

  GameId game_id() const { return state_.game_id; }
  const SessionState& state() const { return state_; }
  const World& world() const { return state_.world; }
  const std::vector<LoggedEvent>& log() const { return log_; }
  std::uint64_t current_digest() const { return digest(state_.world); }

  void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

  std::vector<Outbound> join(PlayerId player, const std::string& name, bool is_bot = false) {
    return commit(player, PlayerJoinedEvent{name, is_bot});
  }

  std::vector<Outbound> leave(PlayerId player) {
    if (state_.find_member(player) == nullptr) throw Error(ErrorCode::NotInGame);
    return commit(player, PlayerLeftEvent{});
  }

  /// With a single member the caller must supply a seat for the computer
  /// player; it joins right before the start.
  std::vector<Outbound> start(PlayerId requester, std::optional<PlayerSeat> bot = std::nullopt) {
    if (state_.phase() != Phase::Lobby) throw Error(ErrorCode::AlreadyStarted);
    if (state_.find_member(requester) == nullptr) throw Error(ErrorCode::NotInGame);
    if (state_.creator() != requester) throw Error(ErrorCode::NotCreator);
    std::vector<PlayerSeat> seats = state_.seats();
    const bool add_bot = seats.size() == 1 && bot.has_value();
    if (add_bot) seats.push_back(*bot);
    // Dry run so a failing start leaves nothing in the log.
    start_game(state_.rules, seats);

    std::vector<Outbound> out;
    if (add_bot) out = commit(bot->player_id, PlayerJoinedEvent{bot->name, true});
    auto started = commit(kSystemActor, GameStartedEvent{seats});
    out.insert(out.end(), started.begin(), started.end());
    return out;
  }

  /// In-game intents: SetLandUse, PostOffer, CancelOffer, AcceptOffer, Chat.
  std::vector<Outbound> handle(PlayerId actor, const protocol::ClientPayload& intent) {
    if (state_.find_member(actor) == nullptr) throw Error(ErrorCode::NotInGame);
    using namespace protocol;
    if (const auto* m = std::get_if<SetLandUse>(&intent)) {
      if (is_noop(actor, *m)) return {};
      return commit(actor, LandUseChangedEvent{m->parcel_id, m->use});
    }
    if (const auto* m = std::get_if<PostOffer>(&intent)) {
      return commit(actor, OfferPostedEvent{state_.world.market.next_offer_id(), m->side,
                                            m->quantity, m->unit_price});
    }
    if (const auto* m = std::get_if<CancelOffer>(&intent)) {
      return commit(actor, OfferCancelledEvent{m->offer_id});
    }
    if (const auto* m = std::get_if<AcceptOffer>(&intent)) {
      return commit(actor, TradeExecutedEvent{m->offer_id, m->quantity,
                                              state_.world.market.next_trade_seq()});
    }
    if (const auto* m = std::get_if<Chat>(&intent)) {
      return commit(actor, ChatSentEvent{m->text});
    }
    throw Error(ErrorCode::UnknownType, std::string(type_name(intent)) + " is not an in-game intent");
  }

  /// One accounting period. No-op unless running.
  std::vector<Outbound> tick() {
    if (state_.phase() != Phase::Running) return {};
    auto out = commit(kSystemActor, TickAccruedEvent{state_.world.state.tick + 1});
    if (state_.phase() == Phase::Finished) {
      auto over = commit(kSystemActor, GameFinishedEvent{});
      out.insert(out.end(), over.begin(), over.end());
    }
    return out;
  }

  static std::int64_t system_clock_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
  }

 private:
  bool is_noop(PlayerId actor, const protocol::SetLandUse& m) const {
    const GameState& gs = state_.world.state;
    if (gs.phase != Phase::Running || !gs.landscape.contains(m.parcel_id)) return false;
    const Parcel& p = gs.landscape.at(m.parcel_id);
    return p.owner == actor && p.land_use == m.use;
  }

  std::vector<Outbound> commit(PlayerId actor, EventPayload payload) {
    LoggedEvent event{static_cast<std::int64_t>(log_.size()) + 1, clock_(), actor, std::move(payload), {}};
    auto out = apply_event(state_, event);
    event.digest = digest(state_.world);
    log_.push_back(event);
    if (sink_) sink_(log_.back());
    return out;
  }

  SessionState state_;
  Clock clock_;
  EventSink sink_;
  std::vector<LoggedEvent> log_;
};

// ---------------------------------------------------------------------------
// Replay.

struct ReplayResult {
  SessionState state;
  std::vector<std::uint64_t> digests;  // digest after each event
};

/// Re-applies `events` in order. Throws CorruptLog (gap, or an event the
/// state rejects) or DigestMismatch (recorded digest differs - nondeterminism).
inline ReplayResult replay(std::span<const LoggedEvent> events, GameId game_id, const GameRules& rules) {
  ReplayResult result{make_session_state(game_id, rules), {}};
  std::int64_t expected = 1;
  for (const LoggedEvent& e : events) {
    const std::string where = "seq " + std::to_string(expected);
    if (e.seq != expected) {
      throw Error(ErrorCode::CorruptLog, where + ": found seq " + std::to_string(e.seq), std::to_string(expected));
    }
    try {
      apply_event(result.state, e);
    } catch (const Error& err) {
      throw Error(ErrorCode::CorruptLog, where + ": " + err.what(), std::to_string(expected));
    }
    const std::uint64_t d = digest(result.state.world);
    if (e.digest && *e.digest != d) {
      throw Error(ErrorCode::DigestMismatch,
                  where + ": recorded " + to_hex(*e.digest) + ", replayed " + to_hex(d),
                  std::to_string(expected));
    }
    result.digests.push_back(d);
    ++expected;
  }
  return result;
}

}  // namespace ecotrade
