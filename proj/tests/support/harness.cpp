#include "harness.hpp"

#include <fstream>
#include <sstream>

#include "maspc/model_format.hpp"
#include "maspc/st/runtime.hpp"

namespace maspc::testing {

CompiledCase compile_case(const GeneratedCase& c) {
  CompiledCase out;
  out.model = resolve_or_throw(c.model);
  std::vector<std::string> sources;
  // Codegen needs the resolved model's own copy of each block.
  for (const auto& blk : out.model->model().blocks) {
    if (const auto* tb = std::get_if<TransientBlock>(&blk))
      out.artifacts.push_back(generate_function(*tb));
    else
      out.artifacts.push_back(generate_function_block(*out.model, std::get<PersistentBlock>(blk)));
    sources.push_back(out.artifacts.back().render());
  }
  sources.push_back("PROGRAM Main\nVAR\n    b : " + c.top + ";\nEND_VAR\n\nb();\nEND_PROGRAM\n");
  out.program = st::Program::from_sources(sources, "Main");
  return out;
}

EquivalenceResult check_against_oracle(const GeneratedCase& c, const CompiledCase& compiled, BlockGenerator& gen,
                                       int scans) {
  EquivalenceResult result;
  result.static_bound = compiled.program->static_statement_bound();
  const PersistentBlock* top = nullptr;
  for (const auto& blk : c.model.blocks)
    if (const auto* pb = std::get_if<PersistentBlock>(&blk); pb && pb->id == c.top) top = pb;

  DataflowOracle oracle(c.model);
  OracleState expected = oracle.initial_state(c.top);
  st::NodeRuntime rt(compiled.program, "test");

  for (int k = 0; k < scans; ++k) {
    for (const auto& p : top->in_ports) {
      const Value v = gen.random_value(p.type);
      expected.vars.at(p.name) = v;
      rt.write(*rt.find("Main.b." + p.name), v);
    }
    oracle.scan(c.top, expected);
    rt.begin_scan();
    rt.run_to_end(false);
    result.max_executed = std::max<std::uint64_t>(result.max_executed, rt.executed_statements());

    auto compare = [&](const std::string& name) {
      const Value got = rt.read(*rt.find("Main.b." + name));
      const Value& want = expected.vars.at(name);
      if (!st::identical(got, want) && !result.mismatch)
        result.mismatch = "scan " + std::to_string(k) + ", " + name + ": generated " +
                          st::value_to_json(got).dump() + ", oracle " + st::value_to_json(want).dump();
    };
    for (const auto& p : top->out_ports) compare(p.name);
    for (const auto& v : top->values) compare(v.name);
  }
  return result;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<const ResolvedModel> load_fixture(const std::string& name) {
  auto parsed = parse_model(read_text(source_dir() / "tests" / "fixtures" / name));
  if (!parsed.model) throw std::runtime_error(name + ": " + parsed.diagnostics.front().message);
  return resolve_or_throw(std::move(*parsed.model));
}

std::filesystem::path source_dir() { return MASPC_SOURCE_DIR; }
std::filesystem::path binary_dir() { return MASPC_BINARY_DIR; }

}  // namespace maspc::testing
