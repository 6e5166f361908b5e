// maspc command line: validate | gen | comm | run | serve.
//
// Exit codes: 0 success, 1 validation or generation failure, 2 usage or
// input error, 3 runtime error during simulation.

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "maspc/codegen.hpp"
#include "maspc/comm_config.hpp"
#include "maspc/debug/server.hpp"
#include "maspc/debug/service.hpp"
#include "maspc/model_format.hpp"
#include "maspc/resolve.hpp"
#include "maspc/st/simulation.hpp"
#include "maspc/validator.hpp"

namespace fs = std::filesystem;
using namespace maspc;

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2, kRuntime = 3 };

/// Input problems the user must fix before anything runs.
struct InputError {
  std::string code;
  std::string message;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError{"E_IO", "cannot read " + p.string()};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool use_color(std::ostream& os) {
  const char* env = std::getenv("MASPC_COLOR");
  if (env && std::string_view(env) == "never") return false;
  return &os == &std::cout ? isatty(STDOUT_FILENO) : isatty(STDERR_FILENO);
}

struct Loaded {
  std::shared_ptr<const ResolvedModel> model;  // null when parse/resolve failed
  Diagnostics diagnostics;                     // parse and resolve findings
};

Loaded load(const fs::path& path, bool lenient) {
  auto parsed = parse_model(read_file(path), ParseOptions{!lenient});
  Loaded out{nullptr, std::move(parsed.diagnostics)};
  if (!parsed.model) return out;
  auto res = resolve_model(std::move(*parsed.model));
  out.diagnostics.insert(out.diagnostics.end(), res.diagnostics.begin(), res.diagnostics.end());
  out.model = std::move(res.model);
  return out;
}

void print_report(const ValidationReport& report, const std::string& format, std::ostream& os) {
  if (format == "json")
    os << report_to_json(report);
  else
    os << report_to_text(report, use_color(os));
}

/// Loads and fully validates; prints the report to `os` only if it has
/// findings or `always` is set. Returns nullptr when there are errors.
std::shared_ptr<const ResolvedModel> load_checked(const fs::path& path, bool lenient, const ValidateOptions& vopt,
                                                  const std::string& format, std::ostream& os, bool always) {
  Loaded l = load(path, lenient);
  ValidationReport report{l.diagnostics, !has_errors(l.diagnostics)};
  if (l.model) {
    auto v = validate(*l.model, vopt);
    report.diagnostics.insert(report.diagnostics.end(), v.diagnostics.begin(), v.diagnostics.end());
    report.passed = report.passed && v.passed;
  }
  if (always || !report.diagnostics.empty()) print_report(report, format, os);
  return report.passed ? l.model : nullptr;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw InputError{"E_IO", "cannot write " + path.string()};
}

st::Scenario load_scenario(const std::string& path) {
  if (path.empty()) return {};
  return st::parse_scenario(read_file(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maspc: SysML-AT models to IEC 61131-3 Structured Text"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("maspc ") + MASPC_VERSION);

  std::string model_path;
  bool lenient = false;
  bool allow_widening = false;
  std::string format = "text";
  auto common = [&](CLI::App* sub) {
    sub->add_option("model", model_path, "Model file (.maspm)")->required()->check(CLI::ExistingFile);
    sub->add_flag("--lenient", lenient, "Treat unknown keys as warnings");
    sub->add_flag("--allow-widening", allow_widening, "Accept INT->DINT and REAL->LREAL connections");
    sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "json"}));
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check profile restrictions and system consistency");
  common(validate_cmd);

  std::string out_path;
  auto* gen_cmd = app.add_subcommand("gen", "Generate per-node ST files and comm.json");
  common(gen_cmd);
  gen_cmd->add_option("-o,--output", out_path, "Output directory")->required();

  auto* comm_cmd = app.add_subcommand("comm", "Derive the publisher/subscriber configuration");
  common(comm_cmd);
  comm_cmd->add_option("-o,--output", out_path, "Write comm.json here instead of stdout");

  std::string scenario_path;
  std::optional<std::uint64_t> cycles;
  auto* run_cmd = app.add_subcommand("run", "Simulate the generated programs and print a trace");
  common(run_cmd);
  run_cmd->add_option("--scenario", scenario_path, "Scenario file (.scn.json)")->check(CLI::ExistingFile);
  run_cmd->add_option("--cycles", cycles, "Override the scenario cycle count");
  run_cmd->add_option("-o,--output", out_path, "Write the trace here instead of stdout");

  debug::ServerOptions server_opts;
  server_opts.stop_on_signal = true;
  std::uint64_t decimation = 1;
  std::string ui_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Host the debug service on a simulation");
  common(serve_cmd);
  serve_cmd->add_option("--scenario", scenario_path, "Scenario file (.scn.json)")->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", server_opts.port, "TCP port (0 = any free port)");
  serve_cmd->add_option("--address", server_opts.address, "Listen address");
  serve_cmd->add_option("--ui", ui_dir, "Serve this static web bundle over HTTP")->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--decimation", decimation, "Default values broadcast every Nth cycle")
      ->check(CLI::PositiveNumber);
  serve_cmd->add_option("--period-ms", server_opts.period_ms, "Wall-clock time per cycle in run mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const ValidateOptions vopt{allow_widening};
  try {
    if (validate_cmd->parsed()) {
      auto model = load_checked(model_path, lenient, vopt, format, std::cout, true);
      return model ? kOk : kFailed;
    }

    auto model = load_checked(model_path, lenient, vopt, format, std::cerr, false);
    if (!model) return kFailed;

    if (comm_cmd->parsed()) {
      const std::string text = emit_comm_config(derive_pubsub(*model));
      if (out_path.empty())
        std::cout << text;
      else
        write_text(out_path, text);
      return kOk;
    }

    const GeneratedProject project = generate_project(*model, vopt);
    if (gen_cmd->parsed()) {
      write_project(project, out_path);
      return kOk;
    }

    st::Scenario scenario = load_scenario(scenario_path);
    if (run_cmd->parsed()) {
      if (cycles) scenario.cycles = *cycles;
      const std::string trace = st::trace_to_jsonl(st::run_simulation(project, scenario));
      if (out_path.empty())
        std::cout << trace;
      else
        write_text(out_path, trace);
      return kOk;
    }

    // serve
    st::Simulation sim(project, scenario);
    debug::DebugService service(sim, st::node_sources(project));
    service.set_default_decimation(decimation);
    server_opts.ui_dir = ui_dir;
    debug::Server server(service, server_opts);
    const auto port = server.start();
    std::cerr << "maspc: debug service on ws://" << server_opts.address << ":" << port << "/debug";
    if (!ui_dir.empty()) std::cerr << ", UI at http://" << server_opts.address << ":" << port << "/";
    std::cerr << std::endl;
    server.run();
    return kOk;
  } catch (const GenerationError& e) {
    print_report(e.report(), format, std::cerr);
    return kFailed;
  } catch (const InputError& e) {
    std::cerr << "maspc: " << e.code << ": " << e.message << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "maspc: " << e.code() << ": " << e.what() << "\n";
    if (e.code() == "E_RUNTIME") return kRuntime;
    if (e.code() == "E_SCENARIO" || e.code() == "E_IO" || e.code() == "E_UNKNOWN_NAME" || e.code() == "E_BAD_VALUE")
      return kUsage;
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "maspc: " << e.what() << "\n";
    return kFailed;
  }
}
