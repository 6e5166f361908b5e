#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "util.hpp"

using namespace maspc::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int exit = -1;
  std::string out;
  std::string err;
};

const fs::path& scratch() {
  static const fs::path p = [] {
    fs::path d = binary_dir() / "unit-scratch" / "cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

Outcome cli(const std::string& args, const std::string& env = "MASPC_COLOR=never") {
  const fs::path out = scratch() / "stdout.txt";
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd =
      env + " " + quote(MASPC_CLI_PATH) + " " + args + " >" + quote(out.string()) + " 2>" + quote(err.string());
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = read_text(out);
  o.err = read_text(err);
  return o;
}

std::string fixture(const std::string& name) { return quote((source_dir() / "tests/fixtures" / name).string()); }

std::string write_model(const std::string& name, const json& doc) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << doc.dump(2);
  return quote(p.string());
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("--version and usage") {
    const auto v = cli("--version");
    CHECK(v.exit == 0);
    CHECK(v.out.rfind("maspc ", 0) == 0);
    CHECK(cli("").exit == 2);
    CHECK(cli("frobnicate").exit == 2);
    CHECK(cli("validate").exit == 2);
    CHECK(cli("validate /no/such/file.maspm").exit == 2);
    CHECK(cli("validate " + fixture("ppu.maspm") + " --format yaml").exit == 2);
    CHECK(cli("gen " + fixture("ppu.maspm")).exit == 2);  // -o is required
  }

  TEST_CASE("validate") {
    auto r = cli("validate " + fixture("ppu.maspm"));
    CHECK(r.exit == 0);
    CHECK(r.out == "0 errors, 0 warnings\n");

    r = cli("validate --format json " + fixture("ppu.maspm"));
    CHECK(r.exit == 0);
    const auto j = json::parse(r.out);
    CHECK(j["passed"] == true);
    CHECK(j["diagnostics"].empty());

    auto doc = fixture_json("ppu.maspm");
    block(doc, "VC")["constraints"][1]["orderNumber"] = 1;
    r = cli("validate " + write_model("dup.maspm", doc));
    CHECK(r.exit == 1);
    CHECK(r.out.find("error E_DUP_ORDER /blocks/4/constraints/1/orderNumber") == 0);
    CHECK(r.out.find('\x1b') == std::string::npos);

    doc = fixture_json("ppu.maspm");
    doc["hardware"][0]["colour"] = "grey";
    const auto path = write_model("unknown_key.maspm", doc);
    CHECK(cli("validate " + path).exit == 1);
    r = cli("validate --lenient " + path);
    CHECK(r.exit == 0);
    CHECK(r.out.find("warning W_UNKNOWN_KEY") == 0);
  }

  TEST_CASE("widening needs the flag") {
    const auto path = write_model("widen.maspm", typed_pair("INT", "DINT"));
    CHECK(cli("validate " + path).exit == 1);
    const auto r = cli("validate --allow-widening " + path);
    CHECK(r.exit == 0);
    CHECK(r.out.find("W_WIDEN") != std::string::npos);
  }

  TEST_CASE("gen writes the project and nothing on failure") {
    const fs::path out = scratch() / "gen_ok";
    auto r = cli("gen " + fixture("ppu.maspm") + " -o " + quote(out.string()));
    CHECK(r.exit == 0);
    CHECK(r.err.empty());
    CHECK(read_text(out / "CX5010" / "VC.st") == read_text(source_dir() / "tests/golden/ppu/CX5010/VC.st"));
    CHECK(read_text(out / "comm.json") == read_text(source_dir() / "tests/golden/ppu/comm.json"));

    auto doc = fixture_json("ppu.maspm");
    block(doc, "VC")["flows"][0]["orderNumber"] = 5;
    const fs::path bad = scratch() / "gen_bad";
    r = cli("gen " + write_model("bad.maspm", doc) + " -o " + quote(bad.string()));
    CHECK(r.exit == 1);
    CHECK(r.err.find("E_FC_FLOW_NONZERO") != std::string::npos);
    CHECK_FALSE(fs::exists(bad));
  }

  TEST_CASE("comm") {
    auto r = cli("comm " + fixture("ppu.maspm"));
    CHECK(r.exit == 0);
    CHECK(r.out == read_text(source_dir() / "tests/golden/ppu/comm.json"));

    auto doc = fixture_json("ppu.maspm");
    doc["hardware"][1].erase("amsNetId");
    doc["hardware"][1]["busAddress"] = "";
    r = cli("comm " + write_model("noaddr.maspm", doc));
    CHECK(r.exit == 1);
    CHECK(r.err.find("E_MISSING_ADDRESS") != std::string::npos);
  }

  TEST_CASE("run") {
    auto r = cli("run " + fixture("ppu.maspm") + " --scenario " + fixture("ppu.scn.json"));
    CHECK(r.exit == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 6);
    const auto last = json::parse(r.out.substr(r.out.rfind('\n', r.out.size() - 2) + 1));
    CHECK(last["cycle"] == 5);
    CHECK(last["values"]["CX5010.Main.Motor_Stop"] == true);  // 2800 * 0.1 > 270

    r = cli("run " + fixture("ppu.maspm") + " --scenario " + fixture("ppu.scn.json") + " --cycles 2");
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);

    const fs::path bad_scn = scratch() / "bad.scn.json";
    std::ofstream(bad_scn) << R"({"cycles": 2, "stimulus": {"0": {"CX5020.Nope": 1}}})";
    r = cli("run " + fixture("ppu.maspm") + " --scenario " + quote(bad_scn.string()));
    CHECK(r.exit == 2);
    CHECK(r.err.find("E_UNKNOWN_NAME") != std::string::npos);

    std::ofstream(bad_scn) << R"({"cycles": "two"})";
    r = cli("run " + fixture("ppu.maspm") + " --scenario " + quote(bad_scn.string()));
    CHECK(r.exit == 2);
    CHECK(r.err.find("E_SCENARIO") != std::string::npos);
  }

  TEST_CASE("runtime errors exit with 3") {
    auto doc = fixture_json("ppu.maspm");
    block(doc, "AddOffset")["body"] = {"y := x / off;"};
    const auto r = cli("run " + write_model("div0.maspm", doc) + " --cycles 3");
    CHECK(r.exit == 3);
    CHECK(r.err.find("E_RUNTIME") != std::string::npos);
    CHECK(r.err.find("node CX5020, cycle 0") != std::string::npos);
  }
}
