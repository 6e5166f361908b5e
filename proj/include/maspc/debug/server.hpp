#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "maspc/debug/service.hpp"

namespace maspc::debug {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 7431;  // 0 picks an ephemeral port
  std::filesystem::path ui_dir;  // empty: no static files
  unsigned period_ms = 100;  // wall-clock pause between cycles in run mode
  bool stop_on_signal = false;  // SIGINT/SIGTERM end run()
};

/// Hosts a DebugService on one port. A connection whose first bytes are
/// "GET " is HTTP: /debug upgrades to WebSocket (one JSON object per text
/// frame), other paths are served from ui_dir. Any other connection speaks
/// the same protocol as newline-delimited JSON over raw TCP.
///
/// All protocol work happens on the server's single I/O thread.
class Server {
 public:
  Server(DebugService& service, ServerOptions options);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and listens; returns the bound port. Throws Error(E_IO).
  std::uint16_t start();

  /// Serves on the calling thread until stop().
  void run();
  void run_in_background();

  /// Thread-safe. Closes the listener and all sessions.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace maspc::debug
