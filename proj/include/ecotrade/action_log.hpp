#pragma once

// On-disk action log: one JSON object per line.
//
//   {"type":"header","format":"ecotrade-action-log","version":1,"game_id":..,"rules":{..},"crc":..}
//   {"type":"event","seq":1,"wall_clock_ms":..,"actor":..,"kind":"PlayerJoined","payload":{..},"digest":..,"crc":..}
//   ...
//   {"type":"trailer","events":N,"final_digest":..,"crc":..}
//
// "crc" is FNV-1a over the compact dump of the same object without "crc";
// any altered byte in a line turns into CorruptLog on read.

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ecotrade/session.hpp"

namespace ecotrade {

inline constexpr std::string_view kLogFormat = "ecotrade-action-log";
inline constexpr std::int64_t kLogVersion = 1;

struct LogTrailer {
  std::int64_t events = 0;
  std::uint64_t final_digest = 0;
  bool operator==(const LogTrailer&) const = default;
};

struct ActionLog {
  GameId game_id = 0;
  GameRules rules;
  std::vector<LoggedEvent> events;
  std::optional<LogTrailer> trailer;
  bool operator==(const ActionLog&) const = default;
};

namespace log_detail {

using protocol::json;

inline std::string seal(json obj) {
  const std::string body = obj.dump();
  obj["crc"] = to_hex(fnv1a(body));
  return obj.dump();
}

[[noreturn]] inline void corrupt(std::int64_t seq, const std::string& what) {
  throw Error(ErrorCode::CorruptLog, "seq " + std::to_string(seq) + ": " + what, std::to_string(seq));
}

inline json unseal(const std::string& line, std::int64_t seq) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) corrupt(seq, "line is not a JSON object");
  auto crc = obj.find("crc");
  if (crc == obj.end() || !crc->is_string()) corrupt(seq, "missing crc");
  const std::string recorded = crc->get<std::string>();
  obj.erase("crc");
  if (to_hex(fnv1a(obj.dump())) != recorded) corrupt(seq, "crc mismatch");
  return obj;
}

inline std::uint64_t parse_hex(const json& j, std::int64_t seq) {
  if (!j.is_string()) corrupt(seq, "digest must be a hex string");
  const std::string& s = j.get_ref<const std::string&>();
  if (s.size() != 16) corrupt(seq, "digest must have 16 hex digits");
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else corrupt(seq, "digest must be lowercase hex");
  }
  return v;
}

template <std::size_t... I>
EventPayload payload_from(std::string_view kind, const json& j, std::int64_t seq, std::index_sequence<I...>) {
  std::optional<EventPayload> result;
  auto try_one = [&]<std::size_t K>(std::integral_constant<std::size_t, K>) {
    using Alt = std::variant_alternative_t<K, EventPayload>;
    if (result || Alt::kKind != kind) return;
    result = protocol::from_json_value<Alt>(j, "payload");
  };
  (try_one(std::integral_constant<std::size_t, I>{}), ...);
  if (!result) corrupt(seq, "unknown event kind \"" + std::string(kind) + "\"");
  return std::move(*result);
}

}  // namespace log_detail

inline std::string header_line(GameId game_id, const GameRules& rules) {
  protocol::json j = protocol::json::object();
  j["type"] = "header";
  j["format"] = std::string(kLogFormat);
  j["version"] = kLogVersion;
  j["game_id"] = game_id;
  j["rules"] = protocol::to_json_value(rules);
  return log_detail::seal(std::move(j));
}

inline std::string event_line(const LoggedEvent& e) {
  protocol::json j = protocol::json::object();
  j["type"] = "event";
  j["seq"] = e.seq;
  j["wall_clock_ms"] = e.wall_clock_ms;
  j["actor"] = e.actor;
  j["kind"] = std::string(e.kind());
  j["payload"] = std::visit([](const auto& p) { return protocol::to_json_value(p); }, e.payload);
  if (e.digest) j["digest"] = to_hex(*e.digest);
  return log_detail::seal(std::move(j));
}

inline std::string trailer_line(const LogTrailer& t) {
  protocol::json j = protocol::json::object();
  j["type"] = "trailer";
  j["events"] = t.events;
  j["final_digest"] = to_hex(t.final_digest);
  return log_detail::seal(std::move(j));
}

inline void write_log(std::ostream& out, const ActionLog& log) {
  out << header_line(log.game_id, log.rules) << '\n';
  for (const LoggedEvent& e : log.events) out << event_line(e) << '\n';
  if (log.trailer) out << trailer_line(*log.trailer) << '\n';
}

/// Parses a whole log. Structural defects and checksum failures throw
/// Error{CorruptLog} naming the sequence number (0 for the header).
inline ActionLog read_log(std::istream& in) {
  using log_detail::corrupt;
  ActionLog log;
  std::string line;
  if (!std::getline(in, line)) corrupt(0, "empty log");
  {
    const auto h = log_detail::unseal(line, 0);
    try {
      if (h.value("type", "") != "header" || h.value("format", "") != kLogFormat) corrupt(0, "not an action log header");
      if (h.value("version", 0) != kLogVersion) corrupt(0, "unsupported log version");
      log.game_id = protocol::from_json_value<std::int64_t>(h.at("game_id"), "game_id");
      log.rules = protocol::from_json_value<GameRules>(h.at("rules"), "rules");
    } catch (const Error& e) {
      if (e.code() == ErrorCode::CorruptLog) throw;
      corrupt(0, e.what());
    } catch (const std::exception& e) {
      corrupt(0, e.what());
    }
  }
  std::int64_t expected = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (log.trailer) corrupt(expected, "content after trailer");
    const auto obj = log_detail::unseal(line, expected);
    try {
      const std::string type = obj.value("type", "");
      if (type == "trailer") {
        LogTrailer t;
        t.events = protocol::from_json_value<std::int64_t>(obj.at("events"), "events");
        t.final_digest = log_detail::parse_hex(obj.at("final_digest"), expected);
        log.trailer = t;
        continue;
      }
      if (type != "event") corrupt(expected, "unexpected line type");
      LoggedEvent e;
      e.seq = protocol::from_json_value<std::int64_t>(obj.at("seq"), "seq");
      if (e.seq != expected) corrupt(expected, "gap: found seq " + std::to_string(e.seq));
      e.wall_clock_ms = protocol::from_json_value<std::int64_t>(obj.at("wall_clock_ms"), "wall_clock_ms");
      e.actor = protocol::from_json_value<std::int64_t>(obj.at("actor"), "actor");
      const std::string kind = protocol::from_json_value<std::string>(obj.at("kind"), "kind");
      e.payload = log_detail::payload_from(kind, obj.at("payload"), expected,
                                           std::make_index_sequence<std::variant_size_v<EventPayload>>{});
      if (auto d = obj.find("digest"); d != obj.end()) e.digest = log_detail::parse_hex(*d, expected);
      log.events.push_back(std::move(e));
      ++expected;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::CorruptLog) throw;
      corrupt(expected, e.what());
    } catch (const std::exception& e) {
      corrupt(expected, e.what());
    }
  }
  if (log.trailer && log.trailer->events != static_cast<std::int64_t>(log.events.size())) {
    corrupt(expected, "trailer event count does not match");
  }
  return log;
}

struct VerifyReport {
  bool passed = false;
  std::uint64_t final_digest = 0;
  std::optional<std::uint64_t> recorded_digest;
  std::vector<PlayerState> players;
  std::int64_t events = 0;
};

/// Replays the log and compares against the recorded digests. A log without
/// a trailer is checked against its last event's digest.
inline VerifyReport verify_log(const ActionLog& log) {
  const ReplayResult r = replay(log.events, log.game_id, log.rules);
  VerifyReport report;
  report.final_digest = digest(r.state.world);
  report.players = r.state.world.state.players;
  report.events = static_cast<std::int64_t>(log.events.size());
  if (log.trailer) {
    report.recorded_digest = log.trailer->final_digest;
  } else if (!log.events.empty()) {
    report.recorded_digest = log.events.back().digest;
  }
  report.passed = report.recorded_digest ? *report.recorded_digest == report.final_digest
                                         : log.events.empty();
  if (report.recorded_digest && !report.passed) {
    throw Error(ErrorCode::DigestMismatch, "final digest " + to_hex(report.final_digest) +
                                               " differs from recorded " + to_hex(*report.recorded_digest));
  }
  return report;
}

}  // namespace ecotrade
