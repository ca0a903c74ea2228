#pragma once

// Message catalog and codec for client <-> server traffic. One message is a
// single flat JSON object with a "type" discriminator; compound payload
// fields nest as objects/arrays. The same text unit travels as a WebSocket
// text frame or as one newline-terminated line over plain TCP.

#include <concepts>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ecotrade/core.hpp"
#include "ecotrade/market.hpp"

namespace ecotrade::protocol {

using json = nlohmann::ordered_json;

inline constexpr std::int64_t kProtocolVersion = 1;
inline constexpr std::uint16_t kDefaultPort = 7654;
// Larger inputs are rejected before parsing. Snapshots of a 100x100 grid
// stay well below this.
inline constexpr std::size_t kMaxMessageBytes = 8u << 20;

using GameId = std::int64_t;

// ---------------------------------------------------------------------------
// Payload building blocks.

struct PlayerSummary {
  PlayerId player_id = 0;
  std::string name;
  Money cash = 0;
  Ecopoints net_traded = 0;
  Ecopoints production = 0;
  bool operator==(const PlayerSummary&) const = default;
};

/// Everything a client needs to rebuild the authoritative World.
struct Snapshot {
  GameId game_id = 0;
  GameRules rules;
  Phase phase = Phase::Lobby;
  std::int64_t tick = 0;
  std::vector<PlayerSummary> players;
  std::vector<Parcel> parcels;
  std::vector<Offer> offers;
  std::vector<Trade> trades;
  bool operator==(const Snapshot&) const = default;
};

struct CreditValue {
  ParcelId parcel_id = 0;
  Ecopoints credits = 0;
  bool operator==(const CreditValue&) const = default;
};

struct Balance {
  PlayerId player_id = 0;
  Ecopoints production = 0;
  Ecopoints net_traded = 0;
  Money cash = 0;
  bool operator==(const Balance&) const = default;
};

struct TickLine {
  PlayerId player_id = 0;
  Money revenue = 0;
  Money penalty = 0;
  Ecopoints shortfall = 0;
  bool operator==(const TickLine&) const = default;
};

// ---------------------------------------------------------------------------
// Client -> server.

struct Hello {
  static constexpr std::string_view kType = "hello";
  std::string name;
  std::int64_t version = kProtocolVersion;
  bool operator==(const Hello&) const = default;
};
struct CreateGame {
  static constexpr std::string_view kType = "create_game";
  GameRules rules;
  bool operator==(const CreateGame&) const = default;
};
struct JoinGame {
  static constexpr std::string_view kType = "join_game";
  GameId game_id = 0;
  bool operator==(const JoinGame&) const = default;
};
struct StartGame {
  static constexpr std::string_view kType = "start_game";
  bool operator==(const StartGame&) const = default;
};
struct SetLandUse {
  static constexpr std::string_view kType = "set_land_use";
  ParcelId parcel_id = 0;
  LandUse use = LandUse::Conservation;
  bool operator==(const SetLandUse&) const = default;
};
struct PostOffer {
  static constexpr std::string_view kType = "post_offer";
  Side side = Side::Sell;
  Ecopoints quantity = 0;
  Money unit_price = 0;
  bool operator==(const PostOffer&) const = default;
};
struct CancelOffer {
  static constexpr std::string_view kType = "cancel_offer";
  OfferId offer_id = 0;
  bool operator==(const CancelOffer&) const = default;
};
struct AcceptOffer {
  static constexpr std::string_view kType = "accept_offer";
  OfferId offer_id = 0;
  Ecopoints quantity = 0;
  bool operator==(const AcceptOffer&) const = default;
};
struct Chat {
  static constexpr std::string_view kType = "chat";
  std::string text;
  bool operator==(const Chat&) const = default;
};
struct LeaveGame {
  static constexpr std::string_view kType = "leave_game";
  bool operator==(const LeaveGame&) const = default;
};

using ClientPayload = std::variant<Hello, CreateGame, JoinGame, StartGame, SetLandUse, PostOffer,
                                   CancelOffer, AcceptOffer, Chat, LeaveGame>;

struct ClientMessage {
  std::int64_t client_seq = 0;
  ClientPayload payload;
  bool operator==(const ClientMessage&) const = default;
};

// ---------------------------------------------------------------------------
// Server -> client.

struct Welcome {
  static constexpr std::string_view kType = "welcome";
  PlayerId player_id = 0;
  bool operator==(const Welcome&) const = default;
};
struct GameCreated {
  static constexpr std::string_view kType = "game_created";
  GameId game_id = 0;
  GameRules rules;
  bool operator==(const GameCreated&) const = default;
};
struct LobbyUpdate {
  static constexpr std::string_view kType = "lobby_update";
  GameId game_id = 0;
  std::vector<PlayerSeat> players;
  bool operator==(const LobbyUpdate&) const = default;
};
struct GameStarted {
  static constexpr std::string_view kType = "game_started";
  Snapshot snapshot;
  bool operator==(const GameStarted&) const = default;
};
struct ParcelChanged {
  static constexpr std::string_view kType = "parcel_changed";
  ParcelId parcel_id = 0;
  LandUse use = LandUse::Conservation;
  std::vector<CreditValue> affected_credit_values;
  bool operator==(const ParcelChanged&) const = default;
};
struct BalancesUpdate {
  static constexpr std::string_view kType = "balances_update";
  std::vector<Balance> balances;
  bool operator==(const BalancesUpdate&) const = default;
};
struct TickReport {
  static constexpr std::string_view kType = "tick_report";
  std::int64_t tick = 0;
  std::vector<TickLine> reports;
  bool operator==(const TickReport&) const = default;
};
struct OfferPosted {
  static constexpr std::string_view kType = "offer_posted";
  Offer offer;
  bool operator==(const OfferPosted&) const = default;
};
struct OfferCancelled {
  static constexpr std::string_view kType = "offer_cancelled";
  OfferId offer_id = 0;
  bool operator==(const OfferCancelled&) const = default;
};
struct TradeExecuted {
  static constexpr std::string_view kType = "trade_executed";
  Trade trade;
  bool operator==(const TradeExecuted&) const = default;
};
struct ChatRelay {
  static constexpr std::string_view kType = "chat_relay";
  PlayerId player_id = 0;
  std::string text;
  bool operator==(const ChatRelay&) const = default;
};
struct GameOver {
  static constexpr std::string_view kType = "game_over";
  std::vector<Score> scores;
  bool operator==(const GameOver&) const = default;
};
struct ErrorReply {
  static constexpr std::string_view kType = "error";
  std::string code;
  std::string message;
  std::int64_t client_seq = 0;
  bool operator==(const ErrorReply&) const = default;
};

using ServerPayload =
    std::variant<Welcome, GameCreated, LobbyUpdate, GameStarted, ParcelChanged, BalancesUpdate,
                 TickReport, OfferPosted, OfferCancelled, TradeExecuted, ChatRelay, GameOver,
                 ErrorReply>;

struct ServerMessage {
  std::int64_t server_seq = 0;
  ServerPayload payload;
  bool operator==(const ServerMessage&) const = default;
};

// ---------------------------------------------------------------------------
// Field schemas. describe(obj, visitor) lists every wire field once; the
// same list drives encoding and decoding. Names are normative.

template <class S, class T>
concept Is = std::same_as<std::remove_const_t<S>, T>;

template <class S, class V>
  requires Is<S, GameRules>
void describe(S& r, V&& v) {
  v("width", r.width);
  v("height", r.height);
  v("neighborhood", r.neighborhood);
  v("bonus_weight", r.bonus_weight);
  v("obligation", r.obligation);
  v("penalty_rate", r.penalty_rate);
  v("tick_seconds", r.tick_seconds);
  v("total_ticks", r.total_ticks);
  v("base_credit_range", r.base_credit_range);
  v("agri_revenue_range", r.agri_revenue_range);
  v("initial_cash", r.initial_cash);
  v("allocation_mode", r.allocation_mode);
  v("landscape_seed", r.landscape_seed);
}

template <class S, class V>
  requires Is<S, Parcel>
void describe(S& p, V&& v) {
  v("parcel_id", p.parcel_id);
  v("row", p.coord.row);
  v("col", p.coord.col);
  v("owner", p.owner);
  v("land_use", p.land_use);
  v("base_credit", p.base_credit);
  v("agri_revenue", p.agri_revenue);
}

template <class S, class V>
  requires Is<S, Offer>
void describe(S& o, V&& v) {
  v("offer_id", o.offer_id);
  v("maker", o.maker);
  v("side", o.side);
  v("quantity", o.quantity);
  v("unit_price", o.unit_price);
  v("status", o.status);
}

template <class S, class V>
  requires Is<S, Trade>
void describe(S& t, V&& v) {
  v("trade_id", t.trade_id);
  v("offer_id", t.offer_id);
  v("seller", t.seller);
  v("buyer", t.buyer);
  v("quantity", t.quantity);
  v("unit_price", t.unit_price);
  v("tick_at", t.tick_at);
  v("seq", t.seq);
}

template <class S, class V>
  requires Is<S, PlayerSeat>
void describe(S& p, V&& v) {
  v("player_id", p.player_id);
  v("name", p.name);
}

template <class S, class V>
  requires Is<S, Score>
void describe(S& s, V&& v) {
  v("player_id", s.player_id);
  v("cash", s.cash);
}

template <class S, class V>
  requires Is<S, PlayerSummary>
void describe(S& p, V&& v) {
  v("player_id", p.player_id);
  v("name", p.name);
  v("cash", p.cash);
  v("net_traded", p.net_traded);
  v("production", p.production);
}

template <class S, class V>
  requires Is<S, Snapshot>
void describe(S& s, V&& v) {
  v("game_id", s.game_id);
  v("rules", s.rules);
  v("phase", s.phase);
  v("tick", s.tick);
  v("players", s.players);
  v("parcels", s.parcels);
  v("offers", s.offers);
  v("trades", s.trades);
}

template <class S, class V>
  requires Is<S, CreditValue>
void describe(S& c, V&& v) {
  v("parcel_id", c.parcel_id);
  v("credits", c.credits);
}

template <class S, class V>
  requires Is<S, Balance>
void describe(S& b, V&& v) {
  v("player_id", b.player_id);
  v("production", b.production);
  v("net_traded", b.net_traded);
  v("cash", b.cash);
}

template <class S, class V>
  requires Is<S, TickLine>
void describe(S& t, V&& v) {
  v("player_id", t.player_id);
  v("revenue", t.revenue);
  v("penalty", t.penalty);
  v("shortfall", t.shortfall);
}

// Client messages.
template <class S, class V> requires Is<S, Hello>
void describe(S& m, V&& v) { v("name", m.name); v("version", m.version); }
template <class S, class V> requires Is<S, CreateGame>
void describe(S& m, V&& v) { v("rules", m.rules); }
template <class S, class V> requires Is<S, JoinGame>
void describe(S& m, V&& v) { v("game_id", m.game_id); }
template <class S, class V> requires Is<S, StartGame>
void describe(S&, V&&) {}
template <class S, class V> requires Is<S, SetLandUse>
void describe(S& m, V&& v) { v("parcel_id", m.parcel_id); v("use", m.use); }
template <class S, class V> requires Is<S, PostOffer>
void describe(S& m, V&& v) {
  v("side", m.side);
  v("quantity", m.quantity);
  v("unit_price", m.unit_price);
}
template <class S, class V> requires Is<S, CancelOffer>
void describe(S& m, V&& v) { v("offer_id", m.offer_id); }
template <class S, class V> requires Is<S, AcceptOffer>
void describe(S& m, V&& v) { v("offer_id", m.offer_id); v("quantity", m.quantity); }
template <class S, class V> requires Is<S, Chat>
void describe(S& m, V&& v) { v("text", m.text); }
template <class S, class V> requires Is<S, LeaveGame>
void describe(S&, V&&) {}

// Server messages.
template <class S, class V> requires Is<S, Welcome>
void describe(S& m, V&& v) { v("player_id", m.player_id); }
template <class S, class V> requires Is<S, GameCreated>
void describe(S& m, V&& v) { v("game_id", m.game_id); v("rules", m.rules); }
template <class S, class V> requires Is<S, LobbyUpdate>
void describe(S& m, V&& v) { v("game_id", m.game_id); v("players", m.players); }
template <class S, class V> requires Is<S, GameStarted>
void describe(S& m, V&& v) { v("snapshot", m.snapshot); }
template <class S, class V> requires Is<S, ParcelChanged>
void describe(S& m, V&& v) {
  v("parcel_id", m.parcel_id);
  v("use", m.use);
  v("affected_credit_values", m.affected_credit_values);
}
template <class S, class V> requires Is<S, BalancesUpdate>
void describe(S& m, V&& v) { v("balances", m.balances); }
template <class S, class V> requires Is<S, TickReport>
void describe(S& m, V&& v) { v("tick", m.tick); v("reports", m.reports); }
template <class S, class V> requires Is<S, OfferPosted>
void describe(S& m, V&& v) { v("offer", m.offer); }
template <class S, class V> requires Is<S, OfferCancelled>
void describe(S& m, V&& v) { v("offer_id", m.offer_id); }
template <class S, class V> requires Is<S, TradeExecuted>
void describe(S& m, V&& v) { v("trade", m.trade); }
template <class S, class V> requires Is<S, ChatRelay>
void describe(S& m, V&& v) { v("player_id", m.player_id); v("text", m.text); }
template <class S, class V> requires Is<S, GameOver>
void describe(S& m, V&& v) { v("scores", m.scores); }
template <class S, class V> requires Is<S, ErrorReply>
void describe(S& m, V&& v) {
  v("code", m.code);
  v("message", m.message);
  v("client_seq", m.client_seq);
}

// ---------------------------------------------------------------------------
// Value codec.

namespace codec {

struct NullVisitor {
  template <class T>
  void operator()(const char*, T&) const {}
};

template <class T>
concept Described = requires(T& t) { describe(t, NullVisitor{}); };

template <class T>
struct IsVector : std::false_type {};
template <class T>
struct IsVector<std::vector<T>> : std::true_type {};

template <class T>
json to_value(const T& value);

struct Writer {
  json& out;
  template <class T>
  void operator()(const char* key, const T& value) const {
    out[key] = to_value(value);
  }
};

template <class T>
json to_value(const T& value) {
  if constexpr (std::is_same_v<T, bool>) {
    return json(value);
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    return json(value);
  } else if constexpr (std::is_integral_v<T>) {
    return json(static_cast<std::int64_t>(value));
  } else if constexpr (std::is_same_v<T, std::string>) {
    return json(value);
  } else if constexpr (NamedEnum<T>) {
    return json(std::string(enum_name(value)));
  } else if constexpr (std::is_same_v<T, ValueRange>) {
    return json::array({value.min, value.max});
  } else if constexpr (IsVector<T>::value) {
    json arr = json::array();
    for (const auto& item : value) arr.push_back(to_value(item));
    return arr;
  } else {
    static_assert(Described<const T>, "no wire schema for this type");
    json obj = json::object();
    describe(value, Writer{obj});
    return obj;
  }
}

[[noreturn]] inline void bad_type(const std::string& path, const char* expected) {
  throw Error(ErrorCode::BadFieldType, path + ": expected " + expected, path);
}

template <class T>
void from_value(const json& j, T& out, const std::string& path);

struct Reader {
  const json& in;
  std::string prefix;
  template <class T>
  void operator()(const char* key, T& value) const {
    const std::string path = prefix.empty() ? std::string(key) : prefix + "." + key;
    auto it = in.find(key);
    if (it == in.end()) throw Error(ErrorCode::MissingField, path, path);
    from_value(*it, value, path);
  }
};

inline std::int64_t read_i64(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) {
    const auto u = j.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      bad_type(path, "64-bit signed integer");
    return static_cast<std::int64_t>(u);
  }
  if (j.is_number_integer()) return j.get<std::int64_t>();
  bad_type(path, "integer");
}

template <class T>
void from_value(const json& j, T& out, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) bad_type(path, "boolean");
    out = j.get<bool>();
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (j.is_number_unsigned()) {
      out = j.get<std::uint64_t>();
    } else if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
      out = static_cast<std::uint64_t>(j.get<std::int64_t>());
    } else {
      bad_type(path, "unsigned integer");
    }
  } else if constexpr (std::is_integral_v<T>) {
    out = static_cast<T>(read_i64(j, path));
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) bad_type(path, "string");
    out = j.get<std::string>();
  } else if constexpr (NamedEnum<T>) {
    if (!j.is_string()) bad_type(path, "string");
    auto parsed = parse_enum<T>(j.get_ref<const std::string&>());
    if (!parsed) bad_type(path, "one of the enumerated names");
    out = *parsed;
  } else if constexpr (std::is_same_v<T, ValueRange>) {
    if (!j.is_array() || j.size() != 2) bad_type(path, "[min, max]");
    out.min = read_i64(j[0], path + "[0]");
    out.max = read_i64(j[1], path + "[1]");
  } else if constexpr (IsVector<T>::value) {
    if (!j.is_array()) bad_type(path, "array");
    T result;
    result.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
      typename T::value_type item{};
      from_value(j[i], item, path + "[" + std::to_string(i) + "]");
      result.push_back(std::move(item));
    }
    out = std::move(result);
  } else {
    static_assert(Described<T>, "no wire schema for this type");
    if (!j.is_object()) bad_type(path, "object");
    describe(out, Reader{j, path});
  }
}

template <class Variant, std::size_t... I>
Variant decode_alternative(std::string_view type, const json& j, std::index_sequence<I...>) {
  Variant result;
  bool found = false;
  auto try_one = [&]<std::size_t K>(std::integral_constant<std::size_t, K>) {
    using Alt = std::variant_alternative_t<K, Variant>;
    if (found || Alt::kType != type) return;
    Alt alt{};
    describe(alt, Reader{j, {}});
    result = std::move(alt);
    found = true;
  };
  (try_one(std::integral_constant<std::size_t, I>{}), ...);
  if (!found) throw Error(ErrorCode::UnknownType, "type \"" + std::string(type) + "\"");
  return result;
}

inline json parse_object(std::string_view text) {
  if (text.size() > kMaxMessageBytes) {
    throw Error(ErrorCode::MalformedSyntax, "message exceeds " + std::to_string(kMaxMessageBytes) + " bytes");
  }
  json j = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::MalformedSyntax, "not valid JSON");
  if (!j.is_object()) throw Error(ErrorCode::MalformedSyntax, "message must be a JSON object");
  return j;
}

template <class Variant>
std::pair<std::int64_t, Variant> decode_envelope(std::string_view text, const char* seq_field) {
  const json j = parse_object(text);
  auto type_it = j.find("type");
  if (type_it == j.end()) throw Error(ErrorCode::MissingField, "type", "type");
  if (!type_it->is_string()) bad_type("type", "string");
  std::int64_t seq = 0;
  Reader{j, {}}(seq_field, seq);
  Variant payload = decode_alternative<Variant>(
      type_it->get_ref<const std::string&>(), j,
      std::make_index_sequence<std::variant_size_v<Variant>>{});
  return {seq, std::move(payload)};
}

template <class Variant>
std::string encode_envelope(const Variant& payload, const char* seq_field, std::int64_t seq) {
  json j = json::object();
  std::visit(
      [&](const auto& m) {
        j["type"] = std::string(std::decay_t<decltype(m)>::kType);
        j[seq_field] = seq;
        describe(m, Writer{j});
      },
      payload);
  return j.dump(-1, ' ', /*ensure_ascii=*/false, json::error_handler_t::strict);
}

}  // namespace codec

// ---------------------------------------------------------------------------

inline std::string encode(const ClientMessage& m) {
  return codec::encode_envelope(m.payload, "client_seq", m.client_seq);
}
inline std::string encode(const ServerMessage& m) {
  return codec::encode_envelope(m.payload, "server_seq", m.server_seq);
}

/// Throws Error with MalformedSyntax, UnknownType, MissingField or
/// BadFieldType; never anything else for any input bytes.
inline ClientMessage decode_client(std::string_view text) {
  auto [seq, payload] = codec::decode_envelope<ClientPayload>(text, "client_seq");
  return ClientMessage{seq, std::move(payload)};
}
inline ServerMessage decode_server(std::string_view text) {
  auto [seq, payload] = codec::decode_envelope<ServerPayload>(text, "server_seq");
  return ServerMessage{seq, std::move(payload)};
}

/// Best-effort client_seq of a message that failed to decode; 0 if absent.
inline std::int64_t peek_client_seq(std::string_view text) noexcept {
  try {
    const json j = codec::parse_object(text);
    auto it = j.find("client_seq");
    if (it != j.end() && it->is_number_integer()) return codec::read_i64(*it, "client_seq");
  } catch (...) {
  }
  return 0;
}

template <class Payload>
std::string_view type_name(const Payload& payload) {
  return std::visit([](const auto& m) { return std::decay_t<decltype(m)>::kType; }, payload);
}

// Generic JSON conversion for structs with a wire schema, used by the
// action log and the tools.
template <class T>
json to_json_value(const T& value) {
  return codec::to_value(value);
}
template <class T>
T from_json_value(const json& j, const std::string& path = {}) {
  T out{};
  codec::from_value(j, out, path);
  return out;
}

}  // namespace ecotrade::protocol
