#include <gtest/gtest.h>

#include <random>

#include "ecotrade/protocol.hpp"
#include "support/generators.hpp"

using namespace ecotrade;
using namespace ecotrade::protocol;

namespace {

ErrorCode decode_error(std::string_view text) {
  try {
    decode_client(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decoded: " << text;
  return ErrorCode::IoFailure;
}

std::string decode_error_field(std::string_view text) {
  try {
    decode_client(text);
  } catch (const Error& e) {
    return e.field();
  }
  return "<none>";
}

bool is_decode_code(ErrorCode c) {
  return c == ErrorCode::MalformedSyntax || c == ErrorCode::UnknownType || c == ErrorCode::MissingField ||
         c == ErrorCode::BadFieldType;
}

}  // namespace

TEST(Wire, ClientGoldenEncodings) {
  EXPECT_EQ(encode(ClientMessage{1, Hello{"ana", 1}}),
            R"({"type":"hello","client_seq":1,"name":"ana","version":1})");
  EXPECT_EQ(encode(ClientMessage{2, JoinGame{3}}), R"({"type":"join_game","client_seq":2,"game_id":3})");
  EXPECT_EQ(encode(ClientMessage{3, StartGame{}}), R"({"type":"start_game","client_seq":3})");
  EXPECT_EQ(encode(ClientMessage{4, SetLandUse{12, LandUse::Agriculture}}),
            R"({"type":"set_land_use","client_seq":4,"parcel_id":12,"use":"Agriculture"})");
  EXPECT_EQ(encode(ClientMessage{5, PostOffer{Side::Buy, 4, 9}}),
            R"({"type":"post_offer","client_seq":5,"side":"Buy","quantity":4,"unit_price":9})");
  EXPECT_EQ(encode(ClientMessage{6, CancelOffer{2}}), R"({"type":"cancel_offer","client_seq":6,"offer_id":2})");
  EXPECT_EQ(encode(ClientMessage{7, AcceptOffer{2, 1}}),
            R"({"type":"accept_offer","client_seq":7,"offer_id":2,"quantity":1})");
  EXPECT_EQ(encode(ClientMessage{8, Chat{"héllo \"x\""}}),
            "{\"type\":\"chat\",\"client_seq\":8,\"text\":\"h\xC3\xA9llo \\\"x\\\"\"}");
  EXPECT_EQ(encode(ClientMessage{9, LeaveGame{}}), R"({"type":"leave_game","client_seq":9})");
  EXPECT_EQ(encode(ClientMessage{10, CreateGame{GameRules{}}}),
            R"({"type":"create_game","client_seq":10,"rules":{"width":10,"height":10,)"
            R"("neighborhood":"Moore8","bonus_weight":1,"obligation":40,"penalty_rate":2,)"
            R"("tick_seconds":10,"total_ticks":30,"base_credit_range":[1,6],"agri_revenue_range":[1,10],)"
            R"("initial_cash":100,"allocation_mode":"Blocks","landscape_seed":1}})");
}

TEST(Wire, ServerGoldenEncodings) {
  EXPECT_EQ(encode(ServerMessage{1, Welcome{5}}), R"({"type":"welcome","server_seq":1,"player_id":5})");
  EXPECT_EQ(encode(ServerMessage{2, ErrorReply{"NotOwner", "parcel 3", 7}}),
            R"({"type":"error","server_seq":2,"code":"NotOwner","message":"parcel 3","client_seq":7})");
  EXPECT_EQ(encode(ServerMessage{3, ParcelChanged{4, LandUse::Conservation, {{3, 6}, {4, 7}}}}),
            R"({"type":"parcel_changed","server_seq":3,"parcel_id":4,"use":"Conservation",)"
            R"("affected_credit_values":[{"parcel_id":3,"credits":6},{"parcel_id":4,"credits":7}]})");
  EXPECT_EQ(encode(ServerMessage{4, TradeExecuted{Trade{1, 2, 3, 4, 5, 6, 7, 1}}}),
            R"({"type":"trade_executed","server_seq":4,"trade":{"trade_id":1,"offer_id":2,"seller":3,)"
            R"("buyer":4,"quantity":5,"unit_price":6,"tick_at":7,"seq":1}})");
  EXPECT_EQ(encode(ServerMessage{5, TickReport{2, {{1, 10, 4, 2}}}}),
            R"({"type":"tick_report","server_seq":5,"tick":2,"reports":[{"player_id":1,"revenue":10,)"
            R"("penalty":4,"shortfall":2}]})");
  EXPECT_EQ(encode(ServerMessage{6, GameOver{{{2, 50}, {1, 40}}}}),
            R"({"type":"game_over","server_seq":6,"scores":[{"player_id":2,"cash":50},{"player_id":1,"cash":40}]})");
  EXPECT_EQ(encode(ServerMessage{7, LobbyUpdate{1, {{1, "a"}}}}),
            R"({"type":"lobby_update","server_seq":7,"game_id":1,"players":[{"player_id":1,"name":"a"}]})");
}

TEST(Wire, DecodeAcceptsAnyFieldOrderAndExtraFields) {
  const auto m = decode_client(R"({"quantity":3,"extra":[1,2],"offer_id":9,"client_seq":4,"type":"accept_offer"})");
  EXPECT_EQ(m.client_seq, 4);
  EXPECT_EQ(std::get<AcceptOffer>(m.payload), (AcceptOffer{9, 3}));
}

TEST(Wire, EveryClientVariantRoundTrips) {
  std::mt19937_64 rng(1);
  std::array<bool, std::variant_size_v<ClientPayload>> seen{};
  for (int i = 0; i < 2000; ++i) {
    const ClientMessage m = gen::any_client(rng);
    seen[m.payload.index()] = true;
    const std::string text = encode(m);
    ASSERT_EQ(decode_client(text), m) << text;
    ASSERT_EQ(encode(decode_client(text)), text);
  }
  for (bool s : seen) EXPECT_TRUE(s);
}

TEST(Wire, EveryServerVariantRoundTrips) {
  std::mt19937_64 rng(2);
  std::array<bool, std::variant_size_v<ServerPayload>> seen{};
  for (int i = 0; i < 4000; ++i) {
    const ServerMessage m = gen::any_server(rng);
    seen[m.payload.index()] = true;
    const std::string text = encode(m);
    ASSERT_EQ(decode_server(text), m) << text;
  }
  for (bool s : seen) EXPECT_TRUE(s);
}

TEST(Wire, ExtremeIntegersRoundTrip) {
  const ClientMessage m{std::numeric_limits<std::int64_t>::max(),
                        PostOffer{Side::Sell, std::numeric_limits<std::int64_t>::min(), -1}};
  EXPECT_EQ(decode_client(encode(m)), m);
  GameRules r;
  r.landscape_seed = std::numeric_limits<std::uint64_t>::max();
  const ClientMessage c{1, CreateGame{r}};
  EXPECT_EQ(decode_client(encode(c)), c);
}

TEST(Wire, Malformed) {
  EXPECT_EQ(decode_error(""), ErrorCode::MalformedSyntax);
  EXPECT_EQ(decode_error("{"), ErrorCode::MalformedSyntax);
  EXPECT_EQ(decode_error("[1,2]"), ErrorCode::MalformedSyntax);
  EXPECT_EQ(decode_error("42"), ErrorCode::MalformedSyntax);
  EXPECT_EQ(decode_error(R"({"type":"hello"} trailing)"), ErrorCode::MalformedSyntax);
  EXPECT_EQ(decode_error("{\"type\":\"chat\",\"client_seq\":1,\"text\":\"\xFF\"}"), ErrorCode::MalformedSyntax);
  EXPECT_EQ(decode_error(std::string(kMaxMessageBytes + 1, ' ')), ErrorCode::MalformedSyntax);
}

TEST(Wire, UnknownTypeAndMissingFields) {
  EXPECT_EQ(decode_error(R"({"type":"teleport","client_seq":1})"), ErrorCode::UnknownType);
  EXPECT_EQ(decode_error(R"({"type":"welcome","client_seq":1,"player_id":1})"), ErrorCode::UnknownType);
  EXPECT_EQ(decode_error(R"({"client_seq":1})"), ErrorCode::MissingField);
  EXPECT_EQ(decode_error_field(R"({"client_seq":1})"), "type");
  EXPECT_EQ(decode_error_field(R"({"type":"hello","name":"x","version":1})"), "client_seq");
  EXPECT_EQ(decode_error_field(R"({"type":"hello","client_seq":1,"version":1})"), "name");
  EXPECT_EQ(decode_error_field(R"({"type":"create_game","client_seq":1,"rules":{"width":3}})"), "rules.height");
}

TEST(Wire, BadFieldTypes) {
  EXPECT_EQ(decode_error(R"({"type":7,"client_seq":1})"), ErrorCode::BadFieldType);
  EXPECT_EQ(decode_error(R"({"type":"join_game","client_seq":1,"game_id":"3"})"), ErrorCode::BadFieldType);
  EXPECT_EQ(decode_error(R"({"type":"join_game","client_seq":1,"game_id":1.5})"), ErrorCode::BadFieldType);
  EXPECT_EQ(decode_error(R"({"type":"join_game","client_seq":1,"game_id":18446744073709551615})"),
            ErrorCode::BadFieldType);
  EXPECT_EQ(decode_error(R"({"type":"set_land_use","client_seq":1,"parcel_id":1,"use":"Forest"})"),
            ErrorCode::BadFieldType);
  EXPECT_EQ(decode_error_field(R"({"type":"create_game","client_seq":1,"rules":{"width":3,"height":3,)"
                               R"("neighborhood":"Moore8","bonus_weight":1,"obligation":4,"penalty_rate":1,)"
                               R"("tick_seconds":1,"total_ticks":1,"base_credit_range":[1],)"
                               R"("agri_revenue_range":[1,2],"initial_cash":1,"allocation_mode":"Blocks",)"
                               R"("landscape_seed":1}})"),
            "rules.base_credit_range");
  EXPECT_EQ(decode_error_field(R"({"type":"create_game","client_seq":1,"rules":{"width":3,"height":3,)"
                               R"("neighborhood":"Moore8","bonus_weight":1,"obligation":4,"penalty_rate":1,)"
                               R"("tick_seconds":1,"total_ticks":1,"base_credit_range":[1,2],)"
                               R"("agri_revenue_range":[1,2],"initial_cash":1,"allocation_mode":"Blocks",)"
                               R"("landscape_seed":-1}})"),
            "rules.landscape_seed");
}

TEST(Wire, PeekClientSeq) {
  EXPECT_EQ(peek_client_seq(R"({"type":"nope","client_seq":12})"), 12);
  EXPECT_EQ(peek_client_seq("garbage"), 0);
  EXPECT_EQ(peek_client_seq(R"({"client_seq":"x"})"), 0);
}

TEST(Wire, RandomBytesOnlyRaiseDecodeErrors) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100000; ++i) {
    const std::string bytes = gen::random_bytes(rng);
    try {
      decode_client(bytes);
      decode_server(bytes);
    } catch (const Error& e) {
      ASSERT_TRUE(is_decode_code(e.code())) << to_string(e.code());
    }
  }
}

TEST(Wire, MutatedValidMessagesOnlyRaiseDecodeErrors) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20000; ++i) {
    std::string text = encode(gen::any_client(rng));
    const int edits = 1 + static_cast<int>(rng() % 3);
    for (int e = 0; e < edits && !text.empty(); ++e) {
      const std::size_t at = rng() % text.size();
      switch (rng() % 3) {
        case 0: text[at] = static_cast<char>(rng() & 0xFF); break;
        case 1: text.erase(at, 1 + rng() % 4); break;
        default: text.resize(at);
      }
    }
    try {
      decode_client(text);
    } catch (const Error& e) {
      ASSERT_TRUE(is_decode_code(e.code())) << text;
    }
  }
}

TEST(Wire, TypeNames) {
  EXPECT_EQ(type_name(ClientPayload{SetLandUse{}}), "set_land_use");
  EXPECT_EQ(type_name(ServerPayload{ErrorReply{}}), "error");
}
