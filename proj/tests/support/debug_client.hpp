#pragma once

// Scripted clients for the debug protocol: newline-framed TCP and
// WebSocket. Both keep broadcasts that arrive while waiting for a reply.

#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

namespace maspc::testing {

using nlohmann::json;

class DebugClient {
 public:
  enum class Transport { Tcp, WebSocket };

  DebugClient(Transport transport, std::uint16_t port);
  ~DebugClient();

  /// Sends {seq, kind, payload} and returns the reply with that seq (an
  /// error reply included). Throws std::runtime_error on timeout.
  json request(const std::string& kind, json payload = json::object());

  /// Sends raw text as one message.
  void send_raw(const std::string& text);

  /// Next message of any kind (queued broadcasts first).
  json next(std::chrono::milliseconds timeout = std::chrono::seconds(5));

  /// Next broadcast of the given kind, dropping others; nullopt on timeout.
  std::optional<json> wait_for(const std::string& kind, std::chrono::milliseconds timeout = std::chrono::seconds(5));

  std::deque<json>& broadcasts() { return broadcasts_; }
  std::int64_t last_seq() const { return seq_; }

 private:
  std::optional<json> receive(std::chrono::milliseconds timeout);

  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::deque<json> broadcasts_;
  std::int64_t seq_ = 0;
};

}  // namespace maspc::testing
