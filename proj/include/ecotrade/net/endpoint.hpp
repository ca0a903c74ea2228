#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "ecotrade/error.hpp"

namespace ecotrade::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7654;
};

/// "host:port", ":port" or "port". IPv6 literals go in brackets: "[::1]:7654".
inline Endpoint parse_endpoint(std::string_view text, std::string_view field = "listen") {
  Endpoint ep;
  std::string_view port_text = text;
  if (!text.empty() && text.front() == '[') {
    const auto close = text.find(']');
    if (close == std::string_view::npos || close + 1 >= text.size() || text[close + 1] != ':') {
      throw Error(ErrorCode::BadValue, "bad address \"" + std::string(text) + "\"", std::string(field));
    }
    ep.host = std::string(text.substr(1, close - 1));
    port_text = text.substr(close + 2);
  } else if (const auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) ep.host = std::string(text.substr(0, colon));
    port_text = text.substr(colon + 1);
  }
  unsigned value = 0;
  const auto* end = port_text.data() + port_text.size();
  auto [ptr, ec] = std::from_chars(port_text.data(), end, value);
  if (port_text.empty() || ec != std::errc{} || ptr != end || value > 65535) {
    throw Error(ErrorCode::BadValue, "bad port in \"" + std::string(text) + "\"", std::string(field));
  }
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

}  // namespace ecotrade::net
