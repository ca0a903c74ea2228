#include "ecotrade/net/bot_client.hpp"

#include <optional>

#include "ecotrade/client_view.hpp"
#include "ecotrade/net/line_client.hpp"

namespace ecotrade::net {

namespace {

using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;

// True if `m` is the broadcast that results from our own `action`.
bool confirms(const bot::Action& action, const protocol::ServerPayload& m, PlayerId self) {
  using namespace protocol;
  if (const auto* a = std::get_if<SetLandUse>(&action)) {
    const auto* p = std::get_if<ParcelChanged>(&m);
    return p && p->parcel_id == a->parcel_id && p->use == a->use;
  }
  if (std::holds_alternative<PostOffer>(action)) {
    const auto* p = std::get_if<OfferPosted>(&m);
    return p && p->offer.maker == self;
  }
  if (const auto* a = std::get_if<CancelOffer>(&action)) {
    const auto* p = std::get_if<OfferCancelled>(&m);
    return p && p->offer_id == a->offer_id;
  }
  if (const auto* a = std::get_if<AcceptOffer>(&action)) {
    const auto* p = std::get_if<TradeExecuted>(&m);
    return p && p->trade.offer_id == a->offer_id && (p->trade.buyer == self || p->trade.seller == self);
  }
  return false;
}

struct Pending {
  std::int64_t client_seq = 0;
  bot::Action action;
  Clock::time_point sent;
};

}  // namespace

BotStats run_bot(const BotClientOptions& options, const std::atomic<bool>* stop) {
  bot::validate(options.config);
  BotStats stats;
  const std::string name = options.name.empty() ? "bot-" + std::to_string(options.game_id) : options.name;
  LineClient client(options.server.host, options.server.port);
  ClientView view;
  const std::int64_t hello_seq = client.send(protocol::Hello{name, protocol::kProtocolVersion});
  const std::int64_t join_seq = client.send(protocol::JoinGame{options.game_id});

  const milliseconds period(options.config.decision_period_ms);
  auto next_decision = Clock::now() + period;
  std::optional<Pending> pending;
  bool resync_requested = false;

  try {
    while (stop == nullptr || !stop->load()) {
      const auto now = Clock::now();
      auto wake = pending ? pending->sent + options.ack_timeout : next_decision;
      // Wake up now and then to notice `stop`.
      wake = std::min(wake, now + milliseconds(100));
      const auto wait = std::chrono::duration_cast<milliseconds>(wake - now);
      if (auto line = client.read_line(std::max(wait, milliseconds(1)))) {
        std::optional<protocol::ServerMessage> msg;
        try {
          msg = protocol::decode_server(*line);
        } catch (const Error&) {
          continue;  // not ours to judge; keep playing
        }
        view.apply(*msg);
        if (const auto* err = std::get_if<protocol::ErrorReply>(&msg->payload)) {
          if ((err->client_seq == hello_seq || err->client_seq == join_seq) && !view.has_snapshot()) {
            throw Error(parse_error_code(err->code).value_or(ErrorCode::UnknownGame), "join refused: " + err->message);
          }
          if (pending && err->client_seq == pending->client_seq) {
            ++stats.rejected;
            pending.reset();
          }
        } else if (pending && confirms(pending->action, msg->payload, *view.self())) {
          pending.reset();
        }
        if (std::holds_alternative<protocol::GameStarted>(msg->payload)) resync_requested = false;
        if (view.game_over()) {
          stats.game_over = true;
          break;
        }
        if (view.needs_resync() && !resync_requested) {
          client.send(protocol::JoinGame{options.game_id});
          resync_requested = true;
          pending.reset();
        }
        continue;
      }
      if (pending && Clock::now() >= pending->sent + options.ack_timeout) pending.reset();
      if (pending || Clock::now() < next_decision) continue;
      next_decision = Clock::now() + period;
      if (!view.has_snapshot() || view.needs_resync() || !view.self()) continue;
      ++stats.decisions;
      if (auto action = bot::plan_action(view.world(), *view.self(), options.config)) {
        ++stats.actions;
        const std::int64_t seq = client.send(*action);
        pending = Pending{seq, *action, Clock::now()};
      }
    }
  } catch (const Error& e) {
    // A closed connection after GameOver is a normal end.
    if (e.code() != ErrorCode::IoFailure) throw;
  }
  return stats;
}

}  // namespace ecotrade::net
