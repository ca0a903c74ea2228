// ecotrade: server, bot, replay/verify, export and rules scaffolding.
// Exit codes: 0 success, 1 usage error, 2 verification failure.

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

#include "ecotrade/action_log.hpp"
#include "ecotrade/export.hpp"
#include "ecotrade/net/bot_client.hpp"
#include "ecotrade/net/server.hpp"
#include "ecotrade/rules_file.hpp"

#ifndef ECOTRADE_SUBCOMMAND
#define ECOTRADE_SUBCOMMAND ""
#endif

namespace {

using namespace ecotrade;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kVerifyFailed = 2;

std::atomic<bool> g_stop{false};

ActionLog load_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Unreadable, "cannot open " + path);
  return read_log(in);
}

int verify_exit(const Error& e) {
  std::cerr << "FAIL: " << e.what() << '\n';
  return kVerifyFailed;
}

int cmd_replay(const std::string& path) {
  ActionLog log;
  try {
    log = load_log(path);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptLog) return verify_exit(e);
    throw;
  }
  try {
    const VerifyReport r = verify_log(log);
    std::cout << "game " << log.game_id << ", " << r.events << " events\n";
    std::cout << "final digest " << to_hex(r.final_digest) << '\n';
    if (r.recorded_digest) std::cout << "recorded digest " << to_hex(*r.recorded_digest) << '\n';
    for (const PlayerState& p : r.players) {
      std::cout << "player " << p.player_id << " " << p.name << " cash " << p.cash << '\n';
    }
    std::cout << (r.passed ? "PASS" : "FAIL") << '\n';
    return r.passed ? kOk : kVerifyFailed;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptLog || e.code() == ErrorCode::DigestMismatch) return verify_exit(e);
    throw;
  }
}

int cmd_export(const std::string& path, const std::string& out) {
  ActionLog log;
  ReplayResult r;
  try {
    log = load_log(path);
    r = replay(log.events, log.game_id, log.rules);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptLog || e.code() == ErrorCode::DigestMismatch) return verify_exit(e);
    throw;
  }
  const ExportPaths paths = export_results(r.state, out);
  std::cout << paths.panel.string() << '\n' << paths.trades.string() << '\n';
  return kOk;
}

int cmd_rules(const std::string& out) {
  const std::string text = write_rules_text(GameRules{});
  if (out.empty() || out == "-") {
    std::cout << text;
    return kOk;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  f << text;
  f.close();
  if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const std::string fixed = ECOTRADE_SUBCOMMAND;
  if (!fixed.empty()) args.insert(args.begin(), fixed);
  std::reverse(args.begin(), args.end());  // CLI11 takes them back to front

  CLI::App app("ecotrade: ecosystem-services trading game", "ecotrade");
  app.footer(rules_help());
  app.require_subcommand(1);
  // Top-level help lists every subcommand's flags as well.
  app.set_help_flag();
  app.set_help_all_flag("-h,--help", "print every subcommand, flag and rules key");

  std::string listen = "127.0.0.1:7654", rules_path, log_dir, export_dir;
  std::int64_t tick_ms = 0;
  bool no_bot = false, verbose = false;
  auto* server = app.add_subcommand("server", "run the game server (TCP and WebSocket on one port)");
  server->footer(rules_help());
  server->add_option("--listen", listen, "address:port to listen on")->capture_default_str();
  server->add_option("--rules", rules_path, "rules file; creates game 1 with these rules at startup");
  server->add_option("--log-dir", log_dir, "write one action log per game here");
  server->add_option("--export-dir", export_dir, "write panel.csv and trades.csv per finished game here");
  server->add_option("--tick-ms", tick_ms, "override the rules' tick period (milliseconds)");
  server->add_flag("--no-bot", no_bot, "do not add a computer player to one-player games");
  server->add_flag("-v,--verbose", verbose, "log games to stderr");

  std::string connect = "127.0.0.1:7654", bot_name;
  protocol::GameId game = 1;
  bot::BotConfig bot_config;
  auto* botcmd = app.add_subcommand("bot", "join a game as the computer player");
  botcmd->add_option("--connect", connect, "server address:port")->capture_default_str();
  botcmd->add_option("--game", game, "game id to join")->capture_default_str();
  botcmd->add_option("--period-ms", bot_config.decision_period_ms, "decision period, >= 100")->capture_default_str();
  botcmd->add_option("--markup", bot_config.markup_percent, "ask premium over the last trade price, percent")
      ->capture_default_str();
  botcmd->add_option("--reserve", bot_config.reserve_price, "ask price before any trade")->capture_default_str();
  botcmd->add_option("--name", bot_name, "player name (default bot-<game>)");

  std::string log_path, out_dir;
  auto* replaycmd = app.add_subcommand("replay", "re-run an action log and check its digests");
  replaycmd->add_option("log", log_path, "action log")->required();

  auto* exportcmd = app.add_subcommand("export", "replay a log and write panel.csv and trades.csv");
  exportcmd->add_option("log", log_path, "action log")->required();
  exportcmd->add_option("--out", out_dir, "output directory")->required();

  std::string rules_out;
  auto* rulescmd = app.add_subcommand("rules", "print (or write) a rules file with every default");
  rulescmd->add_option("--out", rules_out, "file to write instead of stdout");

  try {
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*server) {
      net::ServerOptions o;
      o.listen = net::parse_endpoint(listen, "listen");
      if (!rules_path.empty()) o.rules = parse_rules_file(rules_path);
      if (!log_dir.empty()) o.log_dir = log_dir;
      if (!export_dir.empty()) o.export_dir = export_dir;
      if (server->count("--tick-ms")) o.tick_ms = tick_ms;
      o.spawn_bot = !no_bot;
      o.verbose = verbose;
      net::Server s(std::move(o));
      s.run();
      return kOk;
    }
    if (*botcmd) {
      net::BotClientOptions o;
      o.server = net::parse_endpoint(connect, "connect");
      o.game_id = game;
      o.name = bot_name;
      o.config = bot_config;
      std::signal(SIGINT, [](int) { g_stop = true; });
      std::signal(SIGTERM, [](int) { g_stop = true; });
      const net::BotStats stats = net::run_bot(o, &g_stop);
      std::cout << "decisions " << stats.decisions << ", actions " << stats.actions << ", rejected "
                << stats.rejected << (stats.game_over ? ", game over" : "") << '\n';
      return kOk;
    }
    if (*replaycmd) return cmd_replay(log_path);
    if (*exportcmd) return cmd_export(log_path, out_dir);
    if (*rulescmd) return cmd_rules(rules_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << (e.field().empty() ? "" : " (" + e.field() + ")") << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
