#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "maspc/st/simulation.hpp"

namespace maspc::debug {

inline constexpr std::string_view kProtocolVersion = "maspc-debug/1";

/// Transport-independent debug protocol. Every message is a JSON object
/// {seq, kind, payload}. Replies echo seq and kind with "ok": true; failures
/// come back as kind "error" with payload {code, message, request}.
/// Broadcasts ("values", "event") carry no seq.
///
/// Not thread-safe: the owner serializes calls (the server runs everything
/// on one io_context thread), so commands never interleave with a scan.
class DebugService {
 public:
  using SessionId = std::uint64_t;
  using Sink = std::function<void(const std::string&)>;

  explicit DebugService(st::Simulation& sim, std::vector<st::NodeSources> listings = {});

  SessionId open_session(Sink sink);
  void close_session(SessionId id);

  /// Processes one client message; replies and broadcasts go to the sinks.
  void handle(SessionId id, std::string_view text);

  /// True between run and pause (or a breakpoint hit).
  bool running() const { return running_; }

  /// In run mode, advances one cycle and broadcasts; otherwise a no-op.
  void tick();

  st::Simulation& simulation() { return sim_; }

  /// Decimation of sessions that subscribe without choosing one.
  void set_default_decimation(std::uint64_t n) { default_decimation_ = n < 1 ? 1 : n; }

 private:
  struct Session {
    Sink sink;
    bool greeted = false;
    std::vector<std::string> names;
    std::uint64_t decimation = 1;
  };

  using json = nlohmann::json;

  json dispatch(Session& s, const std::string& kind, const json& payload);
  json hello_payload() const;
  json values_payload(const std::vector<std::string>& names) const;
  json status_payload() const;
  st::Simulation::Variable lookup(const std::string& name) const;
  std::vector<std::string> names_from(const json& payload, const char* key) const;

  void send(Session& s, const json& msg);
  void broadcast_values(bool cycle_boundary);
  void broadcast_event(const json& payload);
  // Steps always broadcast values; run mode honors each session's decimation.
  void after_advance(st::Simulation::Advance result, bool step);

  st::Simulation& sim_;
  std::vector<st::NodeSources> listings_;
  std::map<SessionId, Session> sessions_;
  SessionId next_id_ = 1;
  bool running_ = false;
  std::uint64_t default_decimation_ = 1;
};

}  // namespace maspc::debug
