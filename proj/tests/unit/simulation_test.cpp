#include <random>

#include "doctest.h"
#include "maspc/codegen.hpp"
#include "maspc/st/simulation.hpp"
#include "util.hpp"

using namespace maspc;
using namespace maspc::st;
using namespace maspc::testing;

namespace {

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

const GeneratedProject& ppu_project() {
  static const GeneratedProject p = generate_project(*load_fixture("ppu.maspm"));
  return p;
}

const char* kPub = "CX5020.Main.measured_value_acquisition_Output";
const char* kSub = "CX5010.Main.measured_value_acquisition_Output";
const char* kSensor = "CX5020.Main.AngleSensor_Value";

std::int16_t int_at(const TraceEntry& e, const std::string& name) { return std::get<std::int16_t>(e.values.at(name)); }

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("well-formed scenario") {
    const auto s = parse_scenario(read_text(source_dir() / "tests/fixtures/ppu.scn.json"));
    CHECK(s.cycles == 6);
    CHECK(s.comm_delay_cycles == 1);
    REQUIRE(s.stimulus.count(3));
    CHECK(s.stimulus.at(3).at("CX5020.AngleSensor_Value") == 2800);
    CHECK(parse_scenario("{}").comm_delay_cycles == 1);
  }

  TEST_CASE("malformed scenarios") {
    for (const char* bad : {"", "[1]", "{\"cycles\": -1}", "{\"cycles\": 1.5}", "{\"commDelayCycles\": 0}",
                            "{\"extra\": 1}", "{\"stimulus\": []}", "{\"stimulus\": {\"x\": {}}}",
                            "{\"stimulus\": {\"1\": 5}}", "{\"stimulus\": {\"-1\": {}}}"})
      CHECK_MESSAGE(code_of([&] { parse_scenario(bad); }) == "E_SCENARIO", bad);
  }

  TEST_CASE("stimulus targets are checked") {
    auto make = [](const std::string& name, nlohmann::json v) {
      Scenario s;
      s.stimulus[0][name] = std::move(v);
      Simulation sim(ppu_project(), s);
    };
    CHECK(code_of([&] { make("CX5020.AngleSensor_Value", 5); }).empty());
    CHECK(code_of([&] { make("CX5020.Main.AngleSensor_Value", 5); }).empty());
    CHECK(code_of([&] { make("CX5020.Nope", 5); }) == "E_UNKNOWN_NAME");
    CHECK(code_of([&] { make("CX9999.AngleSensor_Value", 5); }) == "E_UNKNOWN_NAME");
    CHECK(code_of([&] { make("CX5020.AngleSensor_Value", true); }) == "E_BAD_VALUE");
    CHECK(code_of([&] { make("CX5020.AngleSensor_Value", 70000); }) == "E_BAD_VALUE");
    // Only inputs of Main can be driven.
    CHECK(code_of([&] { make(kPub, 5); }) == "E_BAD_VALUE");
  }
}

TEST_SUITE("simulation") {
  TEST_CASE("stimulus latches and cycles are numbered from zero") {
    Scenario s;
    s.cycles = 5;
    s.stimulus[1]["CX5020.AngleSensor_Value"] = 42;
    const auto trace = run_simulation(ppu_project(), s);
    REQUIRE(trace.size() == 5);
    for (std::uint64_t c = 0; c < 5; ++c) {
      CHECK(trace[c].cycle == c);
      CHECK(int_at(trace[c], kSensor) == (c >= 1 ? 42 : 0));
    }
  }

  TEST_CASE("exchange values arrive after the configured delay") {
    for (std::uint64_t delay : {1, 2, 3}) {
      Scenario s;
      s.cycles = 6;
      s.comm_delay_cycles = delay;
      s.stimulus[0]["CX5020.AngleSensor_Value"] = 900;
      const auto trace = run_simulation(ppu_project(), s);
      for (std::uint64_t c = 0; c < s.cycles; ++c) {
        CHECK(int_at(trace[c], kPub) == 900);
        // Published at the end of cycle 0, due at cycle `delay`; the
        // subscriber keeps its default until then.
        CHECK_MESSAGE(int_at(trace[c], kSub) == (c >= delay ? 900 : 0), "delay " << delay << " cycle " << c);
      }
    }
  }

  TEST_CASE("pub/sub conserves every published value") {
    std::mt19937 rng(0x5EED3001);
    std::uniform_int_distribution<int> raw(-3000, 3000);
    for (std::uint64_t delay : {1, 2, 4}) {
      Scenario s;
      s.cycles = 60;
      s.comm_delay_cycles = delay;
      for (std::uint64_t c = 0; c < s.cycles; ++c)
        if (rng() % 3 == 0) s.stimulus[c]["CX5020.AngleSensor_Value"] = raw(rng);
      const auto trace = run_simulation(ppu_project(), s);
      for (std::uint64_t c = 0; c < s.cycles; ++c) {
        const std::int16_t want = c >= delay ? int_at(trace[c - delay], kPub) : 0;
        REQUIRE_MESSAGE(int_at(trace[c], kSub) == want, "delay " << delay << " cycle " << c);
        // The subscriber's chain sees exactly the delivered value.
        const float angle = std::get<float>(trace[c].values.at("CX5010.Main.VC_SA_inst.Angle"));
        REQUIRE(angle == static_cast<float>(want) * 0.1f);
        REQUIRE(std::get<bool>(trace[c].values.at("CX5010.Main.Motor_Stop")) == (angle > 270.0f));
      }
    }
  }

  TEST_CASE("simulation is deterministic") {
    Scenario s = parse_scenario(read_text(source_dir() / "tests/fixtures/ppu.scn.json"));
    CHECK(trace_to_jsonl(run_simulation(ppu_project(), s)) == trace_to_jsonl(run_simulation(ppu_project(), s)));
    const auto text = trace_to_jsonl(run_simulation(ppu_project(), s));
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
    const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
    CHECK(first["cycle"] == 0);
    CHECK(first["values"][kSensor] == 900);
  }

  TEST_CASE("runtime errors name node and cycle") {
    NodeSources n{"N", {"PROGRAM Main\nVAR_INPUT a : INT; END_VAR\nVAR x : INT; END_VAR\nx := 10 / a;\nEND_PROGRAM\n"}};
    Scenario s;
    s.stimulus[0]["N.a"] = 1;
    s.stimulus[2]["N.a"] = 0;
    Simulation sim({n}, CommConfig{}, s);
    try {
      run_simulation(sim, 4);
      FAIL("expected E_RUNTIME");
    } catch (const Error& e) {
      CHECK(e.code() == "E_RUNTIME");
      CHECK(std::string(e.what()).find("node N, cycle 2") != std::string::npos);
    }
    CHECK(sim.cycle() == 2);
  }

  TEST_CASE("breakpoints pause inside a cycle and resume past them") {
    Scenario s;
    s.stimulus[0]["CX5020.AngleSensor_Value"] = 100;
    Simulation sim(ppu_project(), s);
    CHECK_FALSE(sim.set_breakpoint("RawToDeg", 0));  // FUNCTION
    REQUIRE(sim.set_breakpoint("VC", 1));
    CHECK(sim.advance(true) == Simulation::Advance::Paused);
    CHECK(sim.mid_cycle());
    REQUIRE(sim.pause_location());
    CHECK(sim.pause_location()->node == "CX5010");
    CHECK(sim.pause_location()->location == PauseLocation{"VC", 1, "Main.VC_SA_inst"});
    CHECK(sim.cycle() == 0);
    CHECK(sim.advance(true) == Simulation::Advance::CycleComplete);
    CHECK(sim.cycle() == 1);
    CHECK(sim.advance(true) == Simulation::Advance::Paused);
    CHECK(sim.clear_breakpoint("VC", 1));
    CHECK(sim.advance(true) == Simulation::Advance::CycleComplete);
    CHECK(sim.advance(true) == Simulation::Advance::CycleComplete);
  }

  TEST_CASE("Main-level shorthand for instance variables") {
    Simulation sim(ppu_project(), Scenario{});
    const auto alias = sim.find("CX5010.Main.Angle");
    const auto full = sim.find("CX5010.Main.VC_SA_inst.Angle");
    REQUIRE(alias);
    REQUIRE(full);
    CHECK(alias->ref == full->ref);
    CHECK(sim.find("cx5010.main.angle"));
    CHECK_FALSE(sim.find("CX5020.Main.Angle"));
    CHECK_FALSE(sim.find("CX5010.Main.conv.raw"));

    // Two instances with the same port name make the shorthand ambiguous.
    NodeSources n{"N", {"FUNCTION_BLOCK F\nVAR_OUTPUT y : INT; END_VAR\ny := 1;\nEND_FUNCTION_BLOCK\n",
                        "PROGRAM Main\nVAR a : F; b : F; END_VAR\na();\nb();\nEND_PROGRAM\n"}};
    Simulation two({n}, CommConfig{}, Scenario{});
    CHECK_FALSE(two.find("N.Main.y"));
    CHECK(two.find("N.Main.a.y"));
  }

  TEST_CASE("statement stepping walks both nodes in order") {
    Simulation sim(ppu_project(), Scenario{});
    std::vector<std::string> where;
    for (;;) {
      const auto r = sim.step_statement();
      if (r == Simulation::Advance::CycleComplete) break;
      const auto p = sim.pause_location();
      REQUIRE(p);
      where.push_back(p->node + ":" + p->location.artifact + "/" + std::to_string(p->location.statement_index));
    }
    CHECK(sim.cycle() == 1);
    CHECK(where.front() == "CX5020:Main/1");
    CHECK(std::find(where.begin(), where.end(), "CX5020:MVA/0") != where.end());
    CHECK(std::find(where.begin(), where.end(), "CX5010:VC/1") != where.end());
    CHECK(where.back() == "CX5010:Main/2");
  }
}
