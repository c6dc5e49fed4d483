// Minimal WebSocket client for the event stream: a reader thread fills a
// queue of parsed JSON messages.
#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

namespace net {

class EventClient {
 public:
  EventClient(unsigned short port, const std::string& target) : ws_(ioc_) {
    namespace asio = boost::asio;
    asio::ip::tcp::resolver resolver(ioc_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1:" + std::to_string(port), target);
    reader_ = std::thread([this] { read_loop(); });
  }

  ~EventClient() {
    boost::system::error_code ec;
    ws_.next_layer().shutdown(boost::asio::ip::tcp::socket::shutdown_both, ec);
    ws_.next_layer().close(ec);
    if (reader_.joinable()) reader_.join();
  }

  EventClient(const EventClient&) = delete;
  EventClient& operator=(const EventClient&) = delete;

  std::optional<nlohmann::json> next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(m_);
    cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || done_; });
    if (queue_.empty()) return std::nullopt;
    auto j = std::move(queue_.front());
    queue_.pop_front();
    return j;
  }

 private:
  void read_loop() {
    for (;;) {
      boost::beast::flat_buffer buf;
      boost::system::error_code ec;
      ws_.read(buf, ec);
      std::lock_guard lock(m_);
      if (ec) {
        done_ = true;
        cv_.notify_all();
        return;
      }
      queue_.push_back(nlohmann::json::parse(boost::beast::buffers_to_string(buf.data()), nullptr, false));
      cv_.notify_all();
    }
  }

  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::asio::ip::tcp::socket> ws_;
  std::thread reader_;
  std::mutex m_;
  std::condition_variable cv_;
  std::deque<nlohmann::json> queue_;
  bool done_ = false;
};

}  // namespace net
