#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "maspc/codegen.hpp"
#include "maspc/comm_config.hpp"
#include "maspc/st/runtime.hpp"

namespace maspc::st {

/// `.scn.json`: {cycles, commDelayCycles, stimulus: {"<cycle>": {"node.var": value}}}.
/// Stimulus values latch: a value applied at cycle k stays until overwritten.
struct Scenario {
  std::uint64_t cycles = 0;
  std::uint64_t comm_delay_cycles = 1;
  std::map<std::uint64_t, std::map<std::string, nlohmann::json>> stimulus;  // 0-based cycle index
};

/// Throws Error(E_SCENARIO) on malformed documents.
Scenario parse_scenario(std::string_view text);

/// Sources of one node: every artifact text plus the PROGRAM Main.
struct NodeSources {
  std::string node;
  std::vector<std::string> sources;
};

std::vector<NodeSources> node_sources(const GeneratedProject& project);

struct TraceEntry {
  std::uint64_t cycle = 0;
  std::map<std::string, Value> values;  // "CX5010.Main.vc_inst.Angle" -> value
};

using Trace = std::vector<TraceEntry>;

/// One JSON object per line: {"cycle": c, "values": {...}} with sorted keys.
std::string trace_to_jsonl(const Trace& trace);

struct SimPause {
  std::string node;
  PauseLocation location;
};

/// Lock-step execution of all nodes of a project. Within cycle c the nodes
/// scan in project order; before node i scans, pub/sub messages due at or
/// before c are delivered to it and the stimulus for cycle c is applied. At
/// the end of its scan each publisher emits its exchange variables, due at
/// c + commDelayCycles.
class Simulation {
 public:
  Simulation(const std::vector<NodeSources>& nodes, CommConfig comm, Scenario scenario);
  Simulation(const GeneratedProject& project, Scenario scenario);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Completed cycles.
  std::uint64_t cycle() const { return cycle_; }
  const Scenario& scenario() const { return scenario_; }
  const CommConfig& comm() const { return comm_; }
  std::vector<std::string> node_ids() const;
  NodeRuntime& runtime(std::string_view node);
  const NodeRuntime& runtime(std::string_view node) const;

  /// True while some node is suspended inside its scan.
  bool mid_cycle() const;
  std::optional<SimPause> pause_location() const;

  enum class Advance { CycleComplete, Paused };

  /// Runs to the end of the current cycle. With `honor_breakpoints` it may
  /// stop before a breakpointed statement; resuming never stops again at
  /// the statement it is paused on.
  Advance advance(bool honor_breakpoints);

  /// Executes exactly one statement (starting the next scan if needed).
  Advance step_statement();

  // Qualified names are "<node>.<name>", e.g. "CX5010.Main.VC_SA_inst.Angle".
  // "<node>.Main.<x>" also resolves when exactly one direct instance of Main
  // declares x.
  struct Variable {
    NodeRuntime* runtime;
    VarRef ref;
  };
  std::optional<Variable> find(std::string_view qualified) const;
  std::vector<std::string> variable_names() const;
  std::map<std::string, Value> snapshot() const;

  bool set_breakpoint(std::string_view artifact, std::size_t statement_index);
  bool clear_breakpoint(std::string_view artifact, std::size_t statement_index);
  std::set<std::pair<std::string, std::size_t>> breakpoints() const;

 private:
  struct SimNode {
    std::string id;
    std::unique_ptr<NodeRuntime> runtime;
  };
  struct Message {
    std::uint64_t due;
    std::size_t node;
    VarRef target;
    Value value;
  };
  struct BoundStimulus {
    NodeRuntime* runtime;
    VarRef ref;
    Value value;
  };

  SimNode* node(std::string_view id);
  const SimNode* node(std::string_view id) const;
  void prepare(std::size_t i);
  void finish_node(std::size_t i);
  void finish_cycle();

  std::vector<SimNode> nodes_;
  CommConfig comm_;
  Scenario scenario_;
  std::map<std::uint64_t, std::vector<BoundStimulus>> stimulus_;
  std::deque<Message> in_flight_;
  std::uint64_t cycle_ = 0;
  std::size_t active_ = 0;   // node scanning within the current cycle
  bool prepared_ = false;    // active_ has received inputs and begun its scan
};

/// Runs scenario.cycles cycles without breakpoints and records the image
/// of every node after each cycle. Runtime errors are rethrown as
/// Error(E_RUNTIME) naming node and cycle.
Trace run_simulation(const GeneratedProject& project, const Scenario& scenario);
Trace run_simulation(Simulation& sim, std::uint64_t cycles);

}  // namespace maspc::st
