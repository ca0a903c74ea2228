#include "ecotrade/net/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <deque>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include "ecotrade/action_log.hpp"
#include "ecotrade/export.hpp"
#include "ecotrade/net/bot_client.hpp"

namespace ecotrade::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using protocol::GameId;

namespace {

class Core;

// One client connection. The first bytes decide the transport: an HTTP GET
// is a WebSocket upgrade, anything else is newline-delimited TCP.
class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Core& core) : socket_(std::move(socket)), core_(core) {}

  void start() { read_sniff(); }
  void send(std::string text);
  void close_after_flush() {
    closing_ = true;
    if (!writing_ && out_.empty()) close_now();
  }
  void close_now();
  bool closed() const { return closed_; }

  std::optional<PlayerId> player;
  std::int64_t next_server_seq = 1;
  std::int64_t last_client_seq = 0;

 private:
  enum class Mode { Sniffing, Handshake, Tcp, WebSocket };

  tcp::socket& raw() { return ws_ ? ws_->next_layer() : socket_; }
  void read_sniff();
  void start_websocket();
  void read_tcp();
  void read_ws();
  void on_tcp_data();
  void do_write();

  tcp::socket socket_;
  std::optional<websocket::stream<tcp::socket>> ws_;
  Core& core_;
  Mode mode_ = Mode::Sniffing;
  std::array<char, 16 * 1024> chunk_{};
  std::string inbuf_;
  beast::flat_buffer wsbuf_;
  http::request<http::string_body> request_;
  std::deque<std::string> out_;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
};

struct PlayerRecord {
  PlayerId id = 0;
  std::string name;
  std::weak_ptr<Connection> conn;
  std::optional<GameId> game;
  bool is_bot = false;
};

struct Game {
  std::unique_ptr<Session> session;
  std::unique_ptr<asio::steady_timer> timer;
  std::ofstream log;
  bool finalized = false;
};

class Core {
 public:
  Core(asio::io_context& io, ServerOptions options, std::function<void(BotClientOptions)> spawn_bot)
      : io_(io), options_(std::move(options)), spawn_bot_(std::move(spawn_bot)) {
    if (options_.log_dir) std::filesystem::create_directories(*options_.log_dir);
    if (options_.rules) create_game(*options_.rules);
  }

  void on_line(const std::shared_ptr<Connection>& conn, std::string_view text);
  void on_close(const std::shared_ptr<Connection>& conn);
  void send_error(const std::shared_ptr<Connection>& conn, const Error& e, std::int64_t client_seq);
  void tick(GameId id);
  void shutdown();

  std::uint16_t port = 0;
  std::optional<SessionState> state_of(GameId id) const {
    auto it = games_.find(id);
    if (it == games_.end()) return std::nullopt;
    return it->second->session->state();
  }
  std::vector<LoggedEvent> log_of(GameId id) const {
    auto it = games_.find(id);
    if (it == games_.end()) return {};
    return it->second->session->log();
  }
  std::optional<PlayerId> id_of(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }
  std::int64_t errors_to(PlayerId id) const {
    auto it = errors_.find(id);
    return it == errors_.end() ? 0 : it->second;
  }
  void add_connection(const std::shared_ptr<Connection>& c) { connections_.push_back(c); }

 private:
  GameId create_game(const GameRules& rules);
  void dispatch(const std::shared_ptr<Connection>& conn, const protocol::ClientMessage& m);
  void hello(const std::shared_ptr<Connection>& conn, const protocol::Hello& m);
  PlayerRecord& identified(const std::shared_ptr<Connection>& conn);
  Game& current_game(const PlayerRecord& rec);
  void deliver(GameId id, const std::vector<Outbound>& batch);
  void send_to(const std::shared_ptr<Connection>& conn, protocol::ServerPayload payload);
  void arm_timer(GameId id, bool first);
  void after_batch(GameId id);
  PlayerRecord& register_player(const std::string& name, bool is_bot);

  asio::io_context& io_;
  ServerOptions options_;
  std::function<void(BotClientOptions)> spawn_bot_;
  std::map<std::string, PlayerId> by_name_;
  std::map<PlayerId, PlayerRecord> players_;
  std::map<GameId, std::unique_ptr<Game>> games_;
  std::map<PlayerId, std::int64_t> errors_;
  std::vector<std::weak_ptr<Connection>> connections_;
  PlayerId next_player_ = 1;
  GameId next_game_ = 1;
};

// ---------------------------------------------------------------------------
// Connection

void Connection::read_sniff() {
  socket_.async_read_some(asio::buffer(chunk_), [self = shared_from_this()](beast::error_code ec, std::size_t n) {
    if (ec) return self->close_now();
    self->inbuf_.append(self->chunk_.data(), n);
    static constexpr std::string_view kGet = "GET ";
    const std::size_t k = std::min(self->inbuf_.size(), kGet.size());
    if (self->inbuf_.compare(0, k, kGet.substr(0, k)) != 0) {
      self->mode_ = Mode::Tcp;
      self->on_tcp_data();
      if (!self->closed_) self->read_tcp();
    } else if (k == kGet.size()) {
      self->start_websocket();
    } else {
      self->read_sniff();
    }
  });
}

void Connection::start_websocket() {
  mode_ = Mode::Handshake;
  auto b = wsbuf_.prepare(inbuf_.size());
  asio::buffer_copy(b, asio::buffer(inbuf_));
  wsbuf_.commit(inbuf_.size());
  inbuf_.clear();
  ws_.emplace(std::move(socket_));
  http::async_read(ws_->next_layer(), wsbuf_, request_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec || !websocket::is_upgrade(self->request_)) return self->close_now();
    self->ws_->read_message_max(protocol::kMaxMessageBytes);
    self->ws_->text(true);
    self->ws_->async_accept(self->request_, [self](beast::error_code ec2) {
      if (ec2) return self->close_now();
      self->mode_ = Mode::WebSocket;
      self->wsbuf_.consume(self->wsbuf_.size());
      if (!self->out_.empty()) self->do_write();
      self->read_ws();
    });
  });
}

void Connection::read_tcp() {
  socket_.async_read_some(asio::buffer(chunk_), [self = shared_from_this()](beast::error_code ec, std::size_t n) {
    if (ec) return self->close_now();
    self->inbuf_.append(self->chunk_.data(), n);
    self->on_tcp_data();
    if (!self->closed_ && !self->closing_) self->read_tcp();
  });
}

void Connection::on_tcp_data() {
  std::size_t start = 0;
  for (;;) {
    const auto nl = inbuf_.find('\n', start);
    if (nl == std::string::npos) break;
    std::string_view line(inbuf_.data() + start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) core_.on_line(shared_from_this(), line);
    start = nl + 1;
    if (closed_ || closing_) return;
  }
  inbuf_.erase(0, start);
  if (inbuf_.size() > protocol::kMaxMessageBytes) {
    // Framing violation: report and hang up.
    core_.send_error(shared_from_this(),
                     Error(ErrorCode::MalformedSyntax, "line exceeds " + std::to_string(protocol::kMaxMessageBytes) + " bytes"),
                     0);
    inbuf_.clear();
    close_after_flush();
  }
}

void Connection::read_ws() {
  ws_->async_read(wsbuf_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec) return self->close_now();
    if (!self->ws_->got_text()) {
      self->core_.send_error(self, Error(ErrorCode::MalformedSyntax, "binary frames are not accepted"), 0);
      return self->close_after_flush();
    }
    const std::string text = beast::buffers_to_string(self->wsbuf_.data());
    self->wsbuf_.consume(self->wsbuf_.size());
    self->core_.on_line(self, text);
    if (!self->closed_ && !self->closing_) self->read_ws();
  });
}

void Connection::send(std::string text) {
  if (closed_ || closing_) return;
  if (mode_ != Mode::WebSocket) text += '\n';
  out_.push_back(std::move(text));
  if (!writing_ && (mode_ == Mode::Tcp || mode_ == Mode::WebSocket)) do_write();
}

void Connection::do_write() {
  writing_ = true;
  auto on_written = [self = shared_from_this()](beast::error_code ec, std::size_t) {
    self->writing_ = false;
    if (ec) return self->close_now();
    self->out_.pop_front();
    if (!self->out_.empty()) return self->do_write();
    if (self->closing_) self->close_now();
  };
  if (mode_ == Mode::WebSocket) {
    ws_->async_write(asio::buffer(out_.front()), std::move(on_written));
  } else {
    asio::async_write(socket_, asio::buffer(out_.front()), std::move(on_written));
  }
}

void Connection::close_now() {
  if (closed_) return;
  closed_ = true;
  beast::error_code ignored;
  raw().shutdown(tcp::socket::shutdown_both, ignored);
  raw().close(ignored);
  core_.on_close(shared_from_this());
}

// ---------------------------------------------------------------------------
// Core

PlayerRecord& Core::register_player(const std::string& name, bool is_bot) {
  const PlayerId id = next_player_++;
  by_name_[name] = id;
  PlayerRecord& rec = players_[id];
  rec.id = id;
  rec.name = name;
  rec.is_bot = is_bot;
  return rec;
}

GameId Core::create_game(const GameRules& rules) {
  validate(rules);
  const GameId id = next_game_++;
  auto game = std::make_unique<Game>();
  game->session = std::make_unique<Session>(id, rules);
  game->timer = std::make_unique<asio::steady_timer>(io_);
  if (options_.log_dir) {
    const auto path = *options_.log_dir / ("game-" + std::to_string(id) + ".log");
    game->log.open(path, std::ios::binary | std::ios::trunc);
    if (!game->log) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    game->log << header_line(id, rules) << '\n' << std::flush;
    Game* g = game.get();
    game->session->set_event_sink([g](const LoggedEvent& e) { g->log << event_line(e) << '\n' << std::flush; });
  }
  games_[id] = std::move(game);
  if (options_.verbose) std::clog << "game " << id << " created\n";
  return id;
}

void Core::on_line(const std::shared_ptr<Connection>& conn, std::string_view text) {
  std::int64_t seq = 0;
  try {
    const protocol::ClientMessage m = protocol::decode_client(text);
    seq = m.client_seq;
    if (seq <= conn->last_client_seq) {
      throw Error(ErrorCode::StaleClientSeq,
                  "client_seq " + std::to_string(seq) + " after " + std::to_string(conn->last_client_seq));
    }
    conn->last_client_seq = seq;
    dispatch(conn, m);
  } catch (const Error& e) {
    if (seq == 0) seq = protocol::peek_client_seq(text);
    send_error(conn, e, seq);
  } catch (const std::exception& e) {
    send_error(conn, Error(ErrorCode::BadValue, e.what()), seq);
  }
}

void Core::send_error(const std::shared_ptr<Connection>& conn, const Error& e, std::int64_t client_seq) {
  if (conn->player) ++errors_[*conn->player];
  send_to(conn, protocol::ErrorReply{std::string(to_string(e.code())), e.what(), client_seq});
}

void Core::send_to(const std::shared_ptr<Connection>& conn, protocol::ServerPayload payload) {
  conn->send(protocol::encode(protocol::ServerMessage{conn->next_server_seq++, std::move(payload)}));
}

PlayerRecord& Core::identified(const std::shared_ptr<Connection>& conn) {
  if (!conn->player) throw Error(ErrorCode::NotIdentified, "send hello first");
  return players_.at(*conn->player);
}

Game& Core::current_game(const PlayerRecord& rec) {
  if (!rec.game) throw Error(ErrorCode::NotInGame);
  return *games_.at(*rec.game);
}

void Core::hello(const std::shared_ptr<Connection>& conn, const protocol::Hello& m) {
  if (m.version != protocol::kProtocolVersion) {
    throw Error(ErrorCode::BadValue, "protocol version " + std::to_string(m.version) + " not supported", "version");
  }
  if (m.name.empty() || m.name.size() > 64) throw Error(ErrorCode::BadValue, "name must be 1-64 bytes", "name");
  if (conn->player) {
    if (players_.at(*conn->player).name != m.name) throw Error(ErrorCode::NameTaken, "already identified");
    send_to(conn, protocol::Welcome{*conn->player});
    return;
  }
  PlayerRecord* rec = nullptr;
  if (auto it = by_name_.find(m.name); it != by_name_.end()) {
    rec = &players_.at(it->second);
    if (auto live = rec->conn.lock(); live && !live->closed()) throw Error(ErrorCode::NameTaken, m.name);
  } else {
    rec = &register_player(m.name, false);
  }
  rec->conn = conn;
  conn->player = rec->id;
  send_to(conn, protocol::Welcome{rec->id});
}

void Core::dispatch(const std::shared_ptr<Connection>& conn, const protocol::ClientMessage& m) {
  using namespace protocol;
  if (const auto* h = std::get_if<Hello>(&m.payload)) return hello(conn, *h);
  PlayerRecord& rec = identified(conn);
  const auto busy_elsewhere = [&](std::optional<GameId> target) {
    if (!rec.game || rec.game == target) return false;
    auto it = games_.find(*rec.game);
    return it != games_.end() && it->second->session->state().phase() != Phase::Finished;
  };

  if (const auto* c = std::get_if<CreateGame>(&m.payload)) {
    if (busy_elsewhere(std::nullopt)) throw Error(ErrorCode::AlreadyInGame, "game " + std::to_string(*rec.game));
    const GameId id = create_game(c->rules);
    send_to(conn, GameCreated{id, games_.at(id)->session->state().rules});
    auto out = games_.at(id)->session->join(rec.id, rec.name, rec.is_bot);
    rec.game = id;
    deliver(id, out);
    return;
  }
  if (const auto* j = std::get_if<JoinGame>(&m.payload)) {
    auto it = games_.find(j->game_id);
    if (it == games_.end()) throw Error(ErrorCode::UnknownGame, "game " + std::to_string(j->game_id));
    if (busy_elsewhere(j->game_id)) throw Error(ErrorCode::AlreadyInGame, "game " + std::to_string(*rec.game));
    Session& s = *it->second->session;
    const bool lobby = s.state().phase() == Phase::Lobby;
    auto out = s.join(rec.id, rec.name, rec.is_bot);
    rec.game = j->game_id;
    if (lobby) send_to(conn, GameCreated{j->game_id, s.state().rules});
    deliver(j->game_id, out);
    return;
  }
  Game& game = current_game(rec);
  const GameId gid = *rec.game;
  Session& s = *game.session;
  if (std::holds_alternative<StartGame>(m.payload)) {
    std::optional<PlayerSeat> bot_seat;
    const bool solo = s.state().members.size() == 1 && s.state().creator() == rec.id &&
                      s.state().phase() == Phase::Lobby;
    std::string bot_name = "bot-" + std::to_string(gid);
    if (solo && options_.spawn_bot) {
      if (by_name_.contains(bot_name)) bot_name += "-" + std::to_string(next_player_);
      bot_seat = PlayerSeat{next_player_, bot_name};
    }
    auto out = s.start(rec.id, bot_seat);
    if (bot_seat) {
      PlayerRecord& b = register_player(bot_name, true);
      b.game = gid;
    }
    deliver(gid, out);
    arm_timer(gid, true);
    if (bot_seat) {
      BotClientOptions bo;
      bo.server = Endpoint{"127.0.0.1", port};
      bo.game_id = gid;
      bo.name = bot_name;
      bo.config = options_.bot_config;
      spawn_bot_(bo);
    }
    return;
  }
  if (std::holds_alternative<LeaveGame>(m.payload)) {
    auto out = s.leave(rec.id);
    rec.game.reset();
    deliver(gid, out);
    return;
  }
  deliver(gid, s.handle(rec.id, m.payload));
}

void Core::deliver(GameId id, const std::vector<Outbound>& batch) {
  Game& game = *games_.at(id);
  for (const Outbound& o : batch) {
    auto send_one = [&](PlayerId pid) {
      auto it = players_.find(pid);
      if (it == players_.end() || it->second.game != id) return;
      if (auto conn = it->second.conn.lock(); conn && !conn->closed()) send_to(conn, o.payload);
    };
    if (o.to) {
      send_one(*o.to);
    } else {
      for (const Member& m : game.session->state().members) send_one(m.player_id);
    }
  }
  after_batch(id);
}

void Core::after_batch(GameId id) {
  Game& game = *games_.at(id);
  if (game.finalized || game.session->state().phase() != Phase::Finished) return;
  game.finalized = true;
  game.timer->cancel();
  const Session& s = *game.session;
  if (game.log.is_open()) {
    game.log << trailer_line({static_cast<std::int64_t>(s.log().size()), s.current_digest()}) << '\n' << std::flush;
  }
  if (options_.export_dir) {
    try {
      export_results(s.state(), *options_.export_dir / ("game-" + std::to_string(id)));
    } catch (const Error& e) {
      std::clog << "export of game " << id << " failed: " << e.what() << '\n';
    }
  }
  if (options_.verbose) std::clog << "game " << id << " finished, digest " << to_hex(s.current_digest()) << '\n';
}

void Core::arm_timer(GameId id, bool first) {
  if (options_.manual_ticks) return;
  Game& game = *games_.at(id);
  if (game.session->state().phase() != Phase::Running) return;
  const std::int64_t ms = options_.tick_ms.value_or(game.session->state().rules.tick_seconds * 1000);
  const auto period = std::chrono::milliseconds(std::max<std::int64_t>(1, ms));
  if (first) {
    game.timer->expires_after(period);
  } else {
    game.timer->expires_at(game.timer->expiry() + period);
  }
  game.timer->async_wait([this, id](beast::error_code ec) {
    if (ec) return;
    tick(id);
    arm_timer(id, false);
  });
}

void Core::tick(GameId id) {
  auto it = games_.find(id);
  if (it == games_.end()) return;
  deliver(id, it->second->session->tick());
}

void Core::on_close(const std::shared_ptr<Connection>& conn) {
  if (!conn->player) return;
  auto it = players_.find(*conn->player);
  if (it == players_.end()) return;
  PlayerRecord& rec = it->second;
  if (rec.conn.lock() != conn) return;
  rec.conn.reset();
  if (!rec.game) return;
  auto g = games_.find(*rec.game);
  if (g == games_.end()) return;
  // A lobby seat is given up on disconnect; a running seat is kept.
  if (g->second->session->state().phase() == Phase::Lobby) {
    const GameId gid = *rec.game;
    try {
      auto out = g->second->session->leave(rec.id);
      rec.game.reset();
      deliver(gid, out);
    } catch (const Error&) {
    }
  }
}

void Core::shutdown() {
  for (auto& [id, game] : games_) {
    game->timer->cancel();
    if (game->log.is_open()) game->log.flush();
  }
  for (auto& weak : connections_) {
    if (auto c = weak.lock()) c->close_now();
  }
  connections_.clear();
}

}  // namespace

// ---------------------------------------------------------------------------
// Server

struct Server::Impl {
  explicit Impl(ServerOptions o) : options(std::move(o)) {}

  ServerOptions options;
  asio::io_context io;
  std::unique_ptr<tcp::acceptor> acceptor;
  std::unique_ptr<Core> core;
  std::thread io_thread;
  std::mutex bots_mutex;
  std::vector<std::thread> bots;
  std::atomic<bool> stopping{false};
  std::optional<asio::signal_set> signals;

  void bind() {
    core = std::make_unique<Core>(io, options, [this](BotClientOptions bo) { spawn(std::move(bo)); });
    const auto address = asio::ip::make_address(options.listen.host == "localhost" ? "127.0.0.1" : options.listen.host);
    acceptor = std::make_unique<tcp::acceptor>(io);
    const tcp::endpoint ep(address, options.listen.port);
    acceptor->open(ep.protocol());
    acceptor->set_option(asio::socket_base::reuse_address(true));
    acceptor->bind(ep);
    acceptor->listen();
    core->port = acceptor->local_endpoint().port();
    accept();
    if (options.verbose) std::clog << "listening on " << options.listen.host << ":" << core->port << '\n';
  }

  void accept() {
    acceptor->async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // closed
      beast::error_code ignored;
      socket.set_option(tcp::no_delay(true), ignored);
      auto conn = std::make_shared<Connection>(std::move(socket), *core);
      core->add_connection(conn);
      conn->start();
      accept();
    });
  }

  void spawn(BotClientOptions bo) {
    std::lock_guard lock(bots_mutex);
    bots.emplace_back([this, bo] {
      try {
        run_bot(bo, &stopping);
      } catch (const std::exception& e) {
        if (!stopping) std::clog << "bot " << bo.name << ": " << e.what() << '\n';
      }
    });
  }

  void close_all() {
    beast::error_code ignored;
    if (acceptor) acceptor->close(ignored);
    if (signals) signals->cancel(ignored);
    if (core) core->shutdown();
  }

  template <class F>
  auto call(F f) const -> decltype(f()) {
    using R = decltype(f());
    std::packaged_task<R()> task(std::move(f));
    auto fut = task.get_future();
    asio::post(const_cast<asio::io_context&>(io), [&task] { task(); });
    return fut.get();
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  bot::validate(impl_->options.bot_config);
  if (impl_->options.tick_ms && *impl_->options.tick_ms < 1) {
    throw Error(ErrorCode::BadValue, "tick period must be positive", "tick-ms");
  }
}

Server::~Server() { stop(); }

void Server::start() {
  impl_->bind();
  impl_->io_thread = std::thread([this] { impl_->io.run(); });
}

void Server::run() {
  impl_->bind();
  impl_->signals.emplace(impl_->io, SIGINT, SIGTERM);
  impl_->signals->async_wait([this](beast::error_code ec, int) {
    if (ec) return;
    impl_->stopping = true;
    impl_->close_all();
  });
  impl_->io.run();
  impl_->stopping = true;
  std::lock_guard lock(impl_->bots_mutex);
  for (auto& t : impl_->bots) t.join();
  impl_->bots.clear();
}

void Server::stop() {
  if (impl_->stopping.exchange(true)) return;
  if (impl_->io_thread.joinable()) {
    asio::post(impl_->io, [this] { impl_->close_all(); });
    impl_->io_thread.join();
  }
  std::lock_guard lock(impl_->bots_mutex);
  for (auto& t : impl_->bots) t.join();
  impl_->bots.clear();
}

std::uint16_t Server::port() const { return impl_->core ? impl_->core->port : 0; }

void Server::tick(GameId game) {
  impl_->call([&] { impl_->core->tick(game); });
}

std::optional<SessionState> Server::session_state(GameId game) const {
  return impl_->call([&] { return impl_->core->state_of(game); });
}

std::vector<LoggedEvent> Server::session_log(GameId game) const {
  return impl_->call([&] { return impl_->core->log_of(game); });
}

std::optional<PlayerId> Server::player_id(const std::string& name) const {
  return impl_->call([&] { return impl_->core->id_of(name); });
}

std::int64_t Server::errors_sent_to(PlayerId player) const {
  return impl_->call([&] { return impl_->core->errors_to(player); });
}

}  // namespace ecotrade::net
