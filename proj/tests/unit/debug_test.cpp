#include <boost/asio.hpp>
#include <filesystem>
#include <fstream>

#include "debug_client.hpp"
#include "doctest.h"
#include "maspc/codegen.hpp"
#include "maspc/debug/server.hpp"
#include "maspc/debug/service.hpp"
#include "util.hpp"

using namespace maspc;
using namespace maspc::testing;
namespace fs = std::filesystem;

namespace {

const GeneratedProject& ppu_project() {
  static const GeneratedProject p = generate_project(*load_fixture("ppu.maspm"));
  return p;
}

// A service over the PPU project with one captured session.
struct Harness {
  st::Simulation sim{ppu_project(), st::Scenario{}};
  debug::DebugService service{sim, st::node_sources(ppu_project())};
  std::vector<json> out;
  debug::DebugService::SessionId id = service.open_session([this](const std::string& s) { out.push_back(json::parse(s)); });
  std::int64_t seq = 0;

  json request(const std::string& kind, json payload = json::object()) {
    out.clear();
    service.handle(id, json{{"seq", ++seq}, {"kind", kind}, {"payload", std::move(payload)}}.dump());
    REQUIRE_FALSE(out.empty());
    return out.front();
  }
  json hello() { return request("hello", {{"version", "maspc-debug/1"}}); }
  std::vector<json> broadcasts() const { return {out.begin() + 1, out.end()}; }
};

const char* kAngle = "CX5010.Main.VC_SA_inst.Angle";
const char* kSensor = "CX5020.Main.AngleSensor_Value";

}  // namespace

TEST_SUITE("debug-service") {
  TEST_CASE("hello describes the target") {
    Harness h;
    const auto r = h.hello();
    CHECK(r["seq"] == 1);
    CHECK(r["kind"] == "hello");
    CHECK(r["ok"] == true);
    const auto& p = r["payload"];
    CHECK(p["version"] == "maspc-debug/1");
    CHECK(p["nodes"] == json::array({"CX5020", "CX5010"}));
    CHECK(p["cycleCounter"] == 0);
    CHECK(p["mode"] == "paused");
    bool found = false;
    for (const auto& v : p["variables"])
      if (v["name"] == kAngle) found = v["type"] == "REAL";
    CHECK(found);
    bool function_marked = false;
    for (const auto& a : p["artifacts"])
      if (a["name"] == "RawToDeg") {
        function_marked = a["breakable"] == false && a["kind"] == "FUNCTION";
        CHECK(a["source"].get<std::string>().find("FUNCTION RawToDeg : REAL") != std::string::npos);
      }
    CHECK(function_marked);
  }

  TEST_CASE("protocol errors") {
    Harness h;
    // Before hello only hello is accepted.
    auto r = h.request("values");
    CHECK(r["kind"] == "error");
    CHECK(r["seq"] == 1);
    CHECK(r["payload"]["code"] == "E_PROTOCOL");
    CHECK(r["payload"]["request"] == "values");

    r = h.request("hello", {{"version", "maspc-debug/0"}});
    CHECK(r["payload"]["code"] == "E_PROTOCOL");
    CHECK(h.hello()["ok"] == true);

    h.out.clear();
    h.service.handle(h.id, "{not json");
    REQUIRE(h.out.size() == 1);
    CHECK(h.out[0]["kind"] == "error");
    CHECK(h.out[0]["seq"].is_null());
    CHECK(h.out[0]["payload"]["code"] == "E_PROTOCOL");

    h.out.clear();
    h.service.handle(h.id, R"({"kind":"values"})");
    CHECK(h.out.at(0)["payload"]["code"] == "E_PROTOCOL");

    CHECK(h.request("frobnicate")["payload"]["code"] == "E_PROTOCOL");
    CHECK(h.request("subscribe", {{"names", "x"}})["payload"]["code"] == "E_PROTOCOL");
    CHECK(h.request("subscribe", {{"names", {"CX5010.nope"}}})["payload"]["code"] == "E_UNKNOWN_NAME");
    CHECK(h.request("subscribe", {{"names", {kAngle}}, {"decimation", 0}})["payload"]["code"] == "E_BAD_VALUE");
    CHECK(h.request("force", {{"name", kAngle}, {"value", "high"}})["payload"]["code"] == "E_BAD_VALUE");
    CHECK(h.request("force", {{"name", kSensor}, {"value", 99999}})["payload"]["code"] == "E_BAD_VALUE");
    CHECK(h.request("unforce", {{"name", "X.y"}})["payload"]["code"] == "E_UNKNOWN_NAME");
    CHECK(h.request("setBreakpoint", {{"artifact", "Nope"}, {"statementIndex", 0}})["payload"]["code"] ==
          "E_UNKNOWN_NAME");
    CHECK(h.request("setBreakpoint", {{"artifact", "VC"}, {"statementIndex", 50}})["payload"]["code"] ==
          "E_BAD_VALUE");
    CHECK(h.request("setBreakpoint", {{"artifact", "VC"}})["payload"]["code"] == "E_PROTOCOL");
  }

  TEST_CASE("values with no names report status only") {
    Harness h;
    h.hello();
    const auto r = h.request("values", {{"names", json::array()}});
    CHECK(r["ok"] == true);
    CHECK(r["payload"]["cycleCounter"] == 0);
    CHECK_FALSE(r["payload"].contains("values"));

    const auto v = h.request("values", {{"names", {kSensor}}});
    CHECK(v["payload"]["values"][kSensor] == json{{"value", 0}, {"type", "INT"}, {"forced", false}});
  }

  TEST_CASE("forces hold across cycles until released") {
    Harness h;
    h.hello();
    h.request("subscribe", {{"names", {kSensor, kAngle}}});
    CHECK(h.request("force", {{"name", kSensor}, {"value", 1500}})["ok"] == true);
    for (int i = 0; i < 3; ++i) h.request("stepCycle");
    auto v = h.request("values", {{"names", {kSensor, kAngle}}})["payload"]["values"];
    CHECK(v[kSensor]["value"] == 1500);
    CHECK(v[kSensor]["forced"] == true);
    CHECK(v[kAngle]["value"].get<double>() == static_cast<double>(1500.0f * 0.1f));
    h.request("unforce", {{"name", kSensor}});
    v = h.request("values", {{"names", {kSensor}}})["payload"]["values"];
    CHECK(v[kSensor]["forced"] == false);
    CHECK(v[kSensor]["value"] == 1500);  // releasing keeps the last value
  }

  TEST_CASE("one values broadcast per cycle for a subscribed name") {
    Harness h;
    h.hello();
    CHECK(h.request("subscribe", {{"names", {"CX5010.Main.Angle"}}})["ok"] == true);
    h.request("stepCycle");
    const auto b = h.broadcasts();
    REQUIRE(b.size() == 1);
    CHECK(b[0]["kind"] == "values");
    CHECK(b[0]["payload"]["cycleCounter"] == 1);
    CHECK(b[0]["payload"]["values"]["CX5010.Main.Angle"]["type"] == "REAL");
  }

  TEST_CASE("stepping broadcasts and reports pauses") {
    Harness h;
    h.hello();
    h.request("subscribe", {{"names", {kSensor}}, {"decimation", 5}});
    auto r = h.request("stepStatement");
    CHECK(r["ok"] == true);
    CHECK(r["payload"]["pause"]["node"] == "CX5020");
    const auto b = h.broadcasts();
    REQUIRE(b.size() == 2);
    CHECK(b[0]["kind"] == "event");
    CHECK(b[0]["payload"]["event"] == "stepped");
    CHECK(b[1]["kind"] == "values");  // steps ignore decimation

    h.request("setBreakpoint", {{"artifact", "VC"}, {"statementIndex", 0}});
    r = h.request("stepCycle");
    CHECK(r["payload"]["pause"]["artifact"] == "VC");
    CHECK(h.broadcasts().at(0)["payload"]["event"] == "breakpointHit");
    CHECK(h.broadcasts().at(0)["payload"]["pause"]["statementIndex"] == 0);
  }

  TEST_CASE("run mode honors decimation") {
    Harness h;
    h.hello();
    h.request("subscribe", {{"names", {kSensor}}, {"decimation", 3}});
    h.request("run");
    CHECK(h.service.running());
    CHECK(h.request("stepCycle")["payload"]["code"] == "E_BAD_STATE");
    h.out.clear();
    for (int i = 0; i < 9; ++i) h.service.tick();
    std::vector<std::uint64_t> cycles;
    for (const auto& m : h.out) {
      CHECK(m["kind"] == "values");
      cycles.push_back(m["payload"]["cycleCounter"].get<std::uint64_t>());
    }
    CHECK(cycles == std::vector<std::uint64_t>{3, 6, 9});
    const auto r = h.request("pause");
    CHECK(r["payload"]["mode"] == "paused");
    CHECK(h.broadcasts().at(0)["payload"]["event"] == "paused");
    h.out.clear();
    h.service.tick();
    CHECK(h.out.empty());
  }

  TEST_CASE("broadcasts reach every greeted session") {
    Harness h;
    std::vector<json> other, silent;
    auto second = h.service.open_session([&](const std::string& s) { other.push_back(json::parse(s)); });
    h.service.open_session([&](const std::string& s) { silent.push_back(json::parse(s)); });
    h.service.handle(second, R"({"seq":1,"kind":"hello","payload":{"version":"maspc-debug/1"}})");
    h.hello();
    h.request("run");
    CHECK(other.back()["payload"]["event"] == "running");
    CHECK(silent.empty());
    h.service.close_session(second);
    other.clear();
    h.request("pause");
    CHECK(other.empty());
  }

  TEST_CASE("runtime errors stop the run") {
    st::NodeSources n{"N", {"PROGRAM Main\nVAR_INPUT a : INT; END_VAR\nVAR x : INT; END_VAR\nx := 10 / a;\nEND_PROGRAM\n"}};
    st::Simulation sim({n}, CommConfig{}, st::Scenario{});
    debug::DebugService service(sim);
    std::vector<json> out;
    auto id = service.open_session([&](const std::string& s) { out.push_back(json::parse(s)); });
    service.handle(id, R"({"seq":1,"kind":"hello","payload":{"version":"maspc-debug/1"}})");
    service.handle(id, R"({"seq":2,"kind":"stepCycle","payload":{}})");
    CHECK(out.back()["payload"]["code"] == "E_RUNTIME");
    service.handle(id, R"({"seq":3,"kind":"run","payload":{}})");
    out.clear();
    service.tick();
    REQUIRE(out.size() == 1);
    CHECK(out[0]["payload"]["event"] == "runtimeError");
    CHECK(out[0]["payload"]["code"] == "E_RUNTIME");
    CHECK_FALSE(service.running());
  }
}

namespace {

// Minimal HTTP/1.1 GET; returns the raw response.
std::string http_get(std::uint16_t port, const std::string& target) {
  namespace asio = boost::asio;
  asio::io_context io;
  asio::ip::tcp::socket sock(io);
  sock.connect({asio::ip::make_address("127.0.0.1"), port});
  const std::string req = "GET " + target + " HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n";
  asio::write(sock, asio::buffer(req));
  std::string resp;
  boost::system::error_code ec;
  asio::read(sock, asio::dynamic_buffer(resp), ec);
  return resp;
}

struct RunningServer {
  st::Simulation sim{ppu_project(), st::Scenario{}};
  debug::DebugService service{sim, st::node_sources(ppu_project())};
  std::unique_ptr<debug::Server> server;
  std::uint16_t port = 0;

  explicit RunningServer(const fs::path& ui = {}) {
    debug::ServerOptions opts;
    opts.port = 0;
    opts.ui_dir = ui;
    opts.period_ms = 5;
    server = std::make_unique<debug::Server>(service, opts);
    port = server->start();
    server->run_in_background();
  }
  ~RunningServer() { server->stop(); }
};

}  // namespace

TEST_SUITE("debug-server") {
  TEST_CASE("WebSocket transport") {
    RunningServer s;
    DebugClient c(DebugClient::Transport::WebSocket, s.port);
    const auto r = c.request("hello", {{"version", "maspc-debug/1"}});
    CHECK(r["ok"] == true);
    CHECK(r["payload"]["version"] == "maspc-debug/1");
    c.request("subscribe", {{"names", {kSensor}}});
    CHECK(c.request("run")["ok"] == true);
    const auto v = c.wait_for("values", std::chrono::seconds(5));
    REQUIRE(v);
    CHECK((*v)["payload"]["values"][kSensor]["type"] == "INT");
    CHECK(c.request("pause")["payload"]["mode"] == "paused");
  }

  TEST_CASE("newline-framed TCP transport") {
    RunningServer s;
    DebugClient c(DebugClient::Transport::Tcp, s.port);
    c.send_raw("garbage");
    const auto e = c.next();
    CHECK(e["payload"]["code"] == "E_PROTOCOL");
    CHECK(e["seq"].is_null());
    CHECK(c.request("hello", {{"version", "maspc-debug/1"}})["ok"] == true);
    CHECK(c.request("stepCycle")["payload"]["cycleCounter"] == 1);
  }

  TEST_CASE("static files and 404") {
    const fs::path ui = binary_dir() / "unit-scratch" / "ui";
    fs::create_directories(ui / "assets");
    std::ofstream(ui / "index.html") << "<html>monitor</html>";
    std::ofstream(ui / "assets" / "app.js") << "console.log(1);";
    RunningServer s(ui);

    auto index = http_get(s.port, "/");
    CHECK(index.rfind("HTTP/1.1 200", 0) == 0);
    CHECK(index.find("text/html") != std::string::npos);
    CHECK(index.find("<html>monitor</html>") != std::string::npos);

    auto js = http_get(s.port, "/assets/app.js");
    CHECK(js.rfind("HTTP/1.1 200", 0) == 0);
    CHECK(js.find("javascript") != std::string::npos);

    CHECK(http_get(s.port, "/missing.css").rfind("HTTP/1.1 404", 0) == 0);
    CHECK(http_get(s.port, "/../CMakeCache.txt").rfind("HTTP/1.1 404", 0) == 0);

    // The debug endpoint still upgrades next to the static files.
    DebugClient c(DebugClient::Transport::WebSocket, s.port);
    CHECK(c.request("hello", {{"version", "maspc-debug/1"}})["ok"] == true);
  }

  TEST_CASE("without a UI directory every page is 404") {
    RunningServer s;
    CHECK(http_get(s.port, "/").rfind("HTTP/1.1 404", 0) == 0);
  }

  TEST_CASE("several clients share one simulation") {
    RunningServer s;
    DebugClient a(DebugClient::Transport::Tcp, s.port);
    DebugClient b(DebugClient::Transport::WebSocket, s.port);
    a.request("hello", {{"version", "maspc-debug/1"}});
    b.request("hello", {{"version", "maspc-debug/1"}});
    a.request("force", {{"name", kSensor}, {"value", 77}});
    const auto v = b.request("values", {{"names", {kSensor}}});
    CHECK(v["payload"]["values"][kSensor]["value"] == 77);
    CHECK(v["payload"]["values"][kSensor]["forced"] == true);
  }
}
