#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "ecotrade/protocol.hpp"

namespace ecotrade::net {

/// Blocking newline-delimited TCP client. Reads take a timeout; a closed or
/// failed connection throws Error{IoFailure}.
class LineClient {
 public:
  LineClient(const std::string& host, std::uint16_t port,
             std::chrono::milliseconds connect_timeout = std::chrono::seconds(5));
  ~LineClient();
  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  /// Sends with the next client_seq and returns it.
  std::int64_t send(const protocol::ClientPayload& payload);
  void send_raw(std::string_view line);

  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  /// nullopt on timeout. Lines that fail to decode throw the decode Error.
  std::optional<protocol::ServerMessage> receive(std::chrono::milliseconds timeout);

  std::int64_t last_client_seq() const { return next_seq_ - 1; }
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::int64_t next_seq_ = 1;
};

}  // namespace ecotrade::net
