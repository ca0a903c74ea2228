#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecotrade/bot.hpp"
#include "ecotrade/net/endpoint.hpp"
#include "ecotrade/session.hpp"

namespace ecotrade::net {

struct ServerOptions {
  Endpoint listen{"127.0.0.1", 7654};  // port 0 picks a free port
  // Pre-creates game 1 with these rules; its first joiner is the creator.
  std::optional<GameRules> rules;
  std::optional<std::filesystem::path> log_dir;
  std::optional<std::filesystem::path> export_dir;
  // Tick period in milliseconds instead of rules.tick_seconds.
  std::optional<std::int64_t> tick_ms;
  // No tick timer at all; ticks only through Server::tick.
  bool manual_ticks = false;
  // Start a bot client when a game is started with a single player.
  bool spawn_bot = true;
  bot::BotConfig bot_config;
  bool verbose = false;
};

/// Lobby and game host. One I/O thread applies every event of every
/// session, so each session has exactly one writer. Clients may speak
/// newline-delimited TCP or WebSocket on the same port.
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and serves on a background thread.
  void start();
  /// Binds and serves on the calling thread until stop() or SIGINT/SIGTERM.
  void run();
  void stop();
  std::uint16_t port() const;

  // Inspection and control, safe from any thread while started.
  void tick(protocol::GameId game);
  std::optional<SessionState> session_state(protocol::GameId game) const;
  std::vector<LoggedEvent> session_log(protocol::GameId game) const;
  std::optional<PlayerId> player_id(const std::string& name) const;
  /// Error messages sent to a player so far.
  std::int64_t errors_sent_to(PlayerId player) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ecotrade::net
