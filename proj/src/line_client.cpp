#include "ecotrade/net/line_client.hpp"

#include <boost/asio.hpp>
#include <istream>

namespace ecotrade::net {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;

struct LineClient::Impl {
  asio::io_context io;
  tcp::socket socket{io};
  asio::streambuf buffer{protocol::kMaxMessageBytes + 1};

  // Runs the pending operation for at most `timeout`; returns false if it
  // had to be cancelled.
  bool run_for(std::chrono::milliseconds timeout, const bool& done) {
    io.restart();
    io.run_for(timeout);
    if (done) return true;
    boost::system::error_code ignored;
    socket.cancel(ignored);
    io.restart();
    io.run();
    return false;
  }
};

LineClient::LineClient(const std::string& host, std::uint16_t port, std::chrono::milliseconds connect_timeout)
    : impl_(std::make_unique<Impl>()) {
  boost::system::error_code ec;
  tcp::resolver resolver(impl_->io);
  const auto endpoints = resolver.resolve(host, std::to_string(port), ec);
  if (ec) throw Error(ErrorCode::IoFailure, "resolve " + host + ": " + ec.message());
  bool done = false;
  asio::async_connect(impl_->socket, endpoints, [&](const boost::system::error_code& e, const tcp::endpoint&) {
    ec = e;
    done = true;
  });
  impl_->run_for(connect_timeout, done);
  if (!done) throw Error(ErrorCode::IoFailure, "connect " + host + ": timed out");
  if (ec) throw Error(ErrorCode::IoFailure, "connect " + host + ": " + ec.message());
  impl_->socket.set_option(tcp::no_delay(true), ec);
}

LineClient::~LineClient() { close(); }

std::int64_t LineClient::send(const protocol::ClientPayload& payload) {
  const std::int64_t seq = next_seq_++;
  send_raw(protocol::encode(protocol::ClientMessage{seq, payload}));
  return seq;
}

void LineClient::send_raw(std::string_view line) {
  std::string framed(line);
  framed += '\n';
  boost::system::error_code ec;
  asio::write(impl_->socket, asio::buffer(framed), ec);
  if (ec) throw Error(ErrorCode::IoFailure, "send: " + ec.message());
}

std::optional<std::string> LineClient::read_line(std::chrono::milliseconds timeout) {
  boost::system::error_code ec;
  bool done = false;
  asio::async_read_until(impl_->socket, impl_->buffer, '\n',
                         [&](const boost::system::error_code& e, std::size_t) {
                           ec = e;
                           done = true;
                         });
  impl_->run_for(timeout, done);
  if (ec == asio::error::operation_aborted) return std::nullopt;
  if (ec) throw Error(ErrorCode::IoFailure, "receive: " + ec.message());
  std::istream in(&impl_->buffer);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::optional<protocol::ServerMessage> LineClient::receive(std::chrono::milliseconds timeout) {
  auto line = read_line(timeout);
  if (!line) return std::nullopt;
  return protocol::decode_server(*line);
}

void LineClient::close() {
  if (!impl_) return;
  boost::system::error_code ignored;
  impl_->socket.shutdown(tcp::socket::shutdown_both, ignored);
  impl_->socket.close(ignored);
}

}  // namespace ecotrade::net
