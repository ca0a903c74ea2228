#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>

#include "ecotrade/bot.hpp"
#include "ecotrade/net/endpoint.hpp"

namespace ecotrade::net {

struct BotClientOptions {
  Endpoint server;
  protocol::GameId game_id = 1;
  std::string name;  // empty: "bot-<game_id>"
  bot::BotConfig config;
  // How long to wait for the server's answer to an action.
  std::chrono::milliseconds ack_timeout{2000};
};

struct BotStats {
  std::int64_t decisions = 0;
  std::int64_t actions = 0;
  std::int64_t rejected = 0;
  bool game_over = false;
};

/// Plays one game through the wire protocol: one plan_action per decision
/// period, never more than one action in flight. Returns when the game is
/// over, the connection closes or `stop` becomes true.
BotStats run_bot(const BotClientOptions& options, const std::atomic<bool>* stop = nullptr);

}  // namespace ecotrade::net
