#include "maspc/debug/service.hpp"

#include "maspc/st/parser.hpp"

namespace maspc::debug {

namespace {

/// Protocol-level failure carried back to the requester.
struct Reject {
  std::string code;
  std::string message;
};

const char* mode_name(bool running) { return running ? "running" : "paused"; }

}  // namespace

DebugService::DebugService(st::Simulation& sim, std::vector<st::NodeSources> listings)
    : sim_(sim), listings_(std::move(listings)) {}

DebugService::SessionId DebugService::open_session(Sink sink) {
  const SessionId id = next_id_++;
  sessions_[id].sink = std::move(sink);
  return id;
}

void DebugService::close_session(SessionId id) { sessions_.erase(id); }

void DebugService::send(Session& s, const json& msg) {
  if (s.sink) s.sink(msg.dump());
}

void DebugService::handle(SessionId id, std::string_view text) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return;
  Session& s = it->second;

  json msg;
  json seq = nullptr;
  std::string kind;
  auto reject = [&](const std::string& code, const std::string& message) {
    send(s, json{{"seq", seq}, {"kind", "error"}, {"payload", {{"code", code}, {"message", message}, {"request", kind}}}});
  };

  try {
    msg = json::parse(text);
  } catch (const json::parse_error&) {
    reject("E_PROTOCOL", "message is not valid JSON");
    return;
  }
  if (!msg.is_object()) {
    reject("E_PROTOCOL", "message must be a JSON object");
    return;
  }
  if (msg.contains("seq")) seq = msg["seq"];
  if (!seq.is_number_integer()) {
    seq = nullptr;
    reject("E_PROTOCOL", "message needs an integer 'seq'");
    return;
  }
  if (!msg.contains("kind") || !msg["kind"].is_string()) {
    reject("E_PROTOCOL", "message needs a string 'kind'");
    return;
  }
  kind = msg["kind"].get<std::string>();
  json payload = msg.value("payload", json::object());
  if (!payload.is_object()) {
    reject("E_PROTOCOL", "'payload' must be an object");
    return;
  }
  if (!s.greeted && kind != "hello") {
    reject("E_PROTOCOL", "the first message of a session must be hello");
    return;
  }

  // Effects of a command (broadcasts) are queued after its reply.
  std::vector<std::function<void()>> after;
  json reply_payload;
  try {
    if (kind == "run" || kind == "pause" || kind == "stepCycle" || kind == "stepStatement") {
      if (kind == "run") {
        running_ = true;
        reply_payload = status_payload();
        after.push_back([this] { broadcast_event({{"event", "running"}, {"cycleCounter", sim_.cycle()}}); });
      } else if (kind == "pause") {
        const bool was = running_;
        running_ = false;
        reply_payload = status_payload();
        if (was)
          after.push_back([this] {
            broadcast_event({{"event", "paused"}, {"cycleCounter", sim_.cycle()}});
            broadcast_values(false);
          });
      } else {
        if (running_) throw Reject{"E_BAD_STATE", kind + " is only allowed while paused"};
        st::Simulation::Advance r;
        try {
          r = kind == "stepCycle" ? sim_.advance(true) : sim_.step_statement();
        } catch (const Error& e) {
          throw Reject{e.code(), e.what()};
        }
        reply_payload = status_payload();
        after.push_back([this, r] { after_advance(r, true); });
      }
    } else {
      reply_payload = dispatch(s, kind, payload);
    }
  } catch (const Reject& r) {
    reject(r.code, r.message);
    return;
  }
  send(s, json{{"seq", seq}, {"kind", kind}, {"ok", true}, {"payload", reply_payload}});
  for (auto& f : after) f();
}

DebugService::json DebugService::dispatch(Session& s, const std::string& kind, const json& payload) {
  if (kind == "hello") {
    const std::string version = payload.value("version", "");
    if (version != kProtocolVersion)
      throw Reject{"E_PROTOCOL", "unsupported protocol version '" + version + "', expected " +
                                     std::string(kProtocolVersion)};
    s.greeted = true;
    return hello_payload();
  }
  if (kind == "subscribe") {
    auto names = names_from(payload, "names");
    std::uint64_t decimation = default_decimation_;
    if (payload.contains("decimation")) {
      const auto& d = payload["decimation"];
      if (!d.is_number_integer() || d.get<std::int64_t>() < 1)
        throw Reject{"E_BAD_VALUE", "decimation must be a positive integer"};
      decimation = d.get<std::uint64_t>();
    }
    s.names = std::move(names);
    s.decimation = decimation;
    return {{"names", s.names}, {"decimation", s.decimation}};
  }
  if (kind == "values") {
    if (payload.contains("names")) return values_payload(names_from(payload, "names"));
    return values_payload(s.names);
  }
  if (kind == "force") {
    if (!payload.contains("name") || !payload["name"].is_string())
      throw Reject{"E_PROTOCOL", "force needs a string 'name'"};
    if (!payload.contains("value")) throw Reject{"E_PROTOCOL", "force needs a 'value'"};
    const std::string name = payload["name"].get<std::string>();
    auto var = lookup(name);
    auto v = st::value_from_json(payload["value"], var.ref.type());
    if (!v) throw Reject{"E_BAD_VALUE", "value does not fit " + std::string(to_string(var.ref.type())) + " '" + name + "'"};
    var.runtime->force(var.ref, *v);
    return {{"name", name}, {"value", st::value_to_json(*v)}, {"forced", true}};
  }
  if (kind == "unforce") {
    if (!payload.contains("name") || !payload["name"].is_string())
      throw Reject{"E_PROTOCOL", "unforce needs a string 'name'"};
    const std::string name = payload["name"].get<std::string>();
    auto var = lookup(name);
    var.runtime->unforce(var.ref);
    return {{"name", name}, {"forced", false}};
  }
  if (kind == "setBreakpoint" || kind == "clearBreakpoint") {
    if (!payload.contains("artifact") || !payload["artifact"].is_string() || !payload.contains("statementIndex") ||
        !payload["statementIndex"].is_number_integer() || payload["statementIndex"].get<std::int64_t>() < 0)
      throw Reject{"E_PROTOCOL", kind + " needs 'artifact' and a non-negative 'statementIndex'"};
    const std::string artifact = payload["artifact"].get<std::string>();
    const auto index = payload["statementIndex"].get<std::size_t>();
    bool known = false;
    for (const auto& node : sim_.node_ids())
      if (sim_.runtime(node).program().find(artifact)) known = true;
    if (!known) throw Reject{"E_UNKNOWN_NAME", "no artifact '" + artifact + "'"};
    const bool ok = kind == "setBreakpoint" ? sim_.set_breakpoint(artifact, index) : sim_.clear_breakpoint(artifact, index);
    if (!ok) {
      if (kind == "setBreakpoint")
        throw Reject{"E_BAD_VALUE", "'" + artifact + "' has no breakable statement " + std::to_string(index)};
      throw Reject{"E_BAD_VALUE", "no breakpoint at '" + artifact + "' statement " + std::to_string(index)};
    }
    json list = json::array();
    for (const auto& [a, i] : sim_.breakpoints()) list.push_back({{"artifact", a}, {"statementIndex", i}});
    return {{"breakpoints", list}};
  }
  throw Reject{"E_PROTOCOL", "unknown message kind '" + kind + "'"};
}

std::vector<std::string> DebugService::names_from(const json& payload, const char* key) const {
  if (!payload.contains(key)) return {};
  const auto& arr = payload[key];
  if (!arr.is_array()) throw Reject{"E_PROTOCOL", std::string("'") + key + "' must be an array of names"};
  std::vector<std::string> names;
  for (const auto& n : arr) {
    if (!n.is_string()) throw Reject{"E_PROTOCOL", std::string("'") + key + "' must be an array of names"};
    lookup(n.get<std::string>());
    names.push_back(n.get<std::string>());
  }
  return names;
}

st::Simulation::Variable DebugService::lookup(const std::string& name) const {
  auto var = sim_.find(name);
  if (!var) throw Reject{"E_UNKNOWN_NAME", "no variable '" + name + "'"};
  return *var;
}

DebugService::json DebugService::status_payload() const {
  json p{{"cycleCounter", sim_.cycle()}, {"mode", mode_name(running_)}};
  if (auto loc = sim_.pause_location())
    p["pause"] = {{"node", loc->node},
                  {"artifact", loc->location.artifact},
                  {"statementIndex", loc->location.statement_index},
                  {"instance", loc->location.instance}};
  return p;
}

DebugService::json DebugService::values_payload(const std::vector<std::string>& names) const {
  json p = status_payload();
  if (names.empty()) return p;
  json values = json::object();
  for (const auto& name : names) {
    auto var = sim_.find(name);
    if (!var) continue;
    values[name] = {{"value", st::value_to_json(var->runtime->read(var->ref))},
                    {"type", to_string(var->ref.type())},
                    {"forced", var->runtime->is_forced(var->ref)}};
  }
  p["values"] = std::move(values);
  return p;
}

DebugService::json DebugService::hello_payload() const {
  json p = status_payload();
  p["version"] = kProtocolVersion;
  p["nodes"] = sim_.node_ids();
  json vars = json::array();
  for (const auto& name : sim_.variable_names()) {
    auto var = sim_.find(name);
    vars.push_back({{"name", name}, {"type", to_string(var->ref.type())}});
  }
  p["variables"] = std::move(vars);

  json artifacts = json::array();
  for (const auto& node : sim_.node_ids()) {
    const auto& program = sim_.runtime(node).program();
    std::map<std::string, std::string> texts;
    for (const auto& ns : listings_) {
      if (ns.node != node) continue;
      for (const auto& src : ns.sources)
        for (const auto& pou : st::parse_units(src)) texts[pou.upper] = src;
    }
    for (const auto& pou : program.pous()) {
      json stmts = json::array();
      st::for_each_stmt(pou.body, [&](const st::Stmt& stmt) {
        stmts.push_back({{"index", stmt.index}, {"line", stmt.pos.line}});
      });
      json a{{"node", node},
             {"name", pou.name},
             {"kind", st::to_string(pou.kind)},
             {"breakable", pou.kind != st::PouKind::Function},
             {"statements", std::move(stmts)}};
      if (auto t = texts.find(pou.upper); t != texts.end()) a["source"] = t->second;
      artifacts.push_back(std::move(a));
    }
  }
  p["artifacts"] = std::move(artifacts);
  json bps = json::array();
  for (const auto& [a, i] : sim_.breakpoints()) bps.push_back({{"artifact", a}, {"statementIndex", i}});
  p["breakpoints"] = std::move(bps);
  return p;
}

void DebugService::broadcast_values(bool cycle_boundary) {
  for (auto& [id, s] : sessions_) {
    if (!s.greeted || s.names.empty()) continue;
    if (cycle_boundary && sim_.cycle() % s.decimation != 0) continue;
    send(s, json{{"kind", "values"}, {"payload", values_payload(s.names)}});
  }
}

void DebugService::broadcast_event(const json& payload) {
  for (auto& [id, s] : sessions_)
    if (s.greeted) send(s, json{{"kind", "event"}, {"payload", payload}});
}

void DebugService::after_advance(st::Simulation::Advance result, bool step) {
  if (result == st::Simulation::Advance::Paused) {
    json ev = status_payload();
    const bool at_breakpoint = [&] {
      auto loc = sim_.pause_location();
      if (!loc) return false;
      return sim_.breakpoints().count({loc->location.artifact, loc->location.statement_index}) > 0;
    }();
    ev["event"] = at_breakpoint ? "breakpointHit" : "stepped";
    broadcast_event(ev);
    broadcast_values(false);
  } else {
    broadcast_values(!step);
  }
}

void DebugService::tick() {
  if (!running_) return;
  st::Simulation::Advance r;
  try {
    r = sim_.advance(true);
  } catch (const Error& e) {
    running_ = false;
    broadcast_event({{"event", "runtimeError"}, {"code", e.code()}, {"message", e.what()}, {"cycleCounter", sim_.cycle()}});
    return;
  }
  if (r == st::Simulation::Advance::Paused) running_ = false;
  after_advance(r, false);
}

}  // namespace maspc::debug
