#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "maspc/error.hpp"
#include "maspc/st/program.hpp"

namespace maspc::st {

/// E_RUNTIME: divide by zero, conversion overflow, literal out of range.
class RuntimeError : public Error {
 public:
  RuntimeError(std::string artifact, std::size_t statement_index, const std::string& what)
      : Error("E_RUNTIME", artifact + " statement " + std::to_string(statement_index) + ": " + what),
        artifact_(std::move(artifact)),
        statement_index_(statement_index) {}

  const std::string& artifact() const noexcept { return artifact_; }
  std::size_t statement_index() const noexcept { return statement_index_; }

 private:
  std::string artifact_;
  std::size_t statement_index_;
};

enum class Mode { Running, Paused };

/// Where a paused scan will continue: the next statement to execute.
struct PauseLocation {
  std::string artifact;           // POU name
  std::size_t statement_index = 0;
  std::string instance;           // qualified instance path, e.g. "Main.vc_inst"

  bool operator==(const PauseLocation&) const = default;
};

/// Instance storage. Scalars live in `vars`; FB-typed slots own a child.
struct Instance {
  const Pou* pou = nullptr;
  std::string path;
  std::vector<Value> vars;
  std::vector<std::optional<Value>> forced;
  std::vector<std::unique_ptr<Instance>> children;
};

struct VarRef {
  Instance* instance = nullptr;
  std::size_t slot = 0;

  DataType type() const { return type_of(instance->vars[slot]); }
  bool operator==(const VarRef&) const = default;
};

/// Saved execution stack; only meaningful together with the Program it was
/// taken from.
struct ExecutionCursor {
  struct Frame {
    std::string instance;
    std::vector<std::pair<const std::vector<Stmt>*, std::size_t>> cursors;
  };
  std::vector<Frame> frames;
  bool skip_breakpoint = false;
};

/// Value snapshot of one node's runtime.
struct ScanState {
  std::string node_id;
  std::uint64_t cycle_counter = 0;
  std::map<std::string, Value> variable_image;  // "Main.x" -> value
  std::map<std::string, Value> forces;
  std::set<std::pair<std::string, std::size_t>> breakpoints;  // (artifact, statement index)
  Mode mode = Mode::Running;
  std::optional<PauseLocation> pause;
  std::optional<ExecutionCursor> cursor;  // present iff paused mid-scan
};

/// Per-cycle inputs; names are relative to the node ("Main.x").
using Stimulus = std::map<std::string, Value>;

enum class StepResult { Executed, BreakpointHit, ScanComplete };

/// Cyclic-scan interpreter for one node. A scan runs main() once; it can be
/// suspended before any statement of a PROGRAM or FUNCTION_BLOCK body
/// (breakpoints, single-stepping) and resumed later. FUNCTION calls run to
/// completion inside the expression that calls them.
class NodeRuntime {
 public:
  NodeRuntime(std::shared_ptr<const Program> program, std::string node_id);

  NodeRuntime(const NodeRuntime&) = delete;
  NodeRuntime& operator=(const NodeRuntime&) = delete;

  const std::string& node_id() const { return node_id_; }
  const Program& program() const { return *program_; }
  std::uint64_t cycle_counter() const { return cycle_counter_; }
  bool in_scan() const { return in_scan_; }

  // -- variables ------------------------------------------------------------
  std::optional<VarRef> find(std::string_view name) const;
  Value read(VarRef ref) const { return ref.instance->vars[ref.slot]; }
  /// Writes through the force overlay: a forced slot keeps its forced value.
  void write(VarRef ref, const Value& v);
  void force(VarRef ref, const Value& v);
  void unforce(VarRef ref);
  bool is_forced(VarRef ref) const { return ref.instance->forced[ref.slot].has_value(); }
  std::string name_of(VarRef ref) const;
  /// Every scalar variable, qualified ("Main.x", "Main.fb.y"), declaration order.
  const std::vector<std::pair<std::string, VarRef>>& variables() const { return variables_; }
  std::map<std::string, Value> image() const;

  /// Applies a stimulus (inputs overlaid with forces). Unknown names throw
  /// Error(E_UNKNOWN_NAME), type mismatches Error(E_BAD_VALUE).
  void apply(const Stimulus& stimulus);

  // -- breakpoints ------------------------------------------------------------
  /// False when no PROGRAM/FUNCTION_BLOCK of that name has that statement.
  bool set_breakpoint(std::string_view artifact, std::size_t statement_index);
  bool clear_breakpoint(std::string_view artifact, std::size_t statement_index);
  std::set<std::pair<std::string, std::size_t>> breakpoints() const;

  // -- execution --------------------------------------------------------------
  /// Starts a scan (no-op when a scan is already in progress).
  void begin_scan();
  /// Executes one statement. With `honor_breakpoints`, stops before a
  /// statement carrying a breakpoint (once; the next call executes it).
  StepResult step(bool honor_breakpoints);
  /// Runs until the scan completes or a breakpoint is hit.
  StepResult run_to_end(bool honor_breakpoints);
  /// Lets the next step pass the breakpoint at the current location.
  void resume_past_breakpoint() { skip_breakpoint_ = in_scan_; }
  /// True when the scan in progress has no statements left.
  bool at_scan_end() const { return in_scan_ && !next_statement(); }
  /// Completes the scan if no statements are left; true if it did.
  bool finish_if_done();
  /// Next statement of the scan in progress.
  std::optional<PauseLocation> location() const;

  /// Statements executed in the current (or last) scan, FC bodies included.
  std::uint64_t executed_statements() const { return executed_; }

  ScanState state() const;
  void restore(const ScanState& state);

 private:
  struct Cursor {
    const std::vector<Stmt>* list;
    std::size_t next;
  };
  struct Frame {
    Instance* instance;
    std::vector<Cursor> cursors;
  };
  struct Operand {
    Value value;
    bool literal = false;
  };

  struct NextStmt {
    std::size_t frame;
    const Stmt* stmt;
  };
  std::optional<NextStmt> next_statement() const;
  void unwind();

  std::unique_ptr<Instance> instantiate(const Pou& pou, std::string path);
  void index_variables(Instance& inst);
  Instance* instance_at(std::string_view path) const;

  void execute(std::size_t frame, const Stmt& stmt);
  void execute_atomic(Instance& inst, const std::vector<Stmt>& body);
  VarRef resolve(Instance& scope, const NameExpr& name) const;
  Instance* resolve_instance(Instance& scope, const NameExpr& name) const;
  void assign(VarRef target, const Operand& v);
  Operand eval(Instance& scope, const Expr& e);
  Operand call_function(Instance& scope, const std::string& upper, const std::vector<Argument>& args);
  Value coerce(const Operand& v, DataType target) const;

  [[noreturn]] void runtime_error(const std::string& what) const;

  std::shared_ptr<const Program> program_;
  std::string node_id_;
  std::unique_ptr<Instance> root_;
  std::vector<std::pair<std::string, VarRef>> variables_;
  std::map<std::string, VarRef> by_upper_name_;
  std::set<const Stmt*> breakpoints_;
  std::map<std::pair<std::string, std::size_t>, const Stmt*> breakpoint_keys_;
  std::vector<Frame> stack_;
  bool in_scan_ = false;
  bool skip_breakpoint_ = false;
  std::uint64_t cycle_counter_ = 0;
  std::uint64_t executed_ = 0;
  // Statement currently executing, for error reports.
  const Pou* current_pou_ = nullptr;
  std::size_t current_index_ = 0;
};

/// Functional form of one scan: restores `state`, applies `stimulus`, runs
/// the scan (honoring breakpoints) and returns the resulting state. A state
/// paused mid-scan resumes from its cursor.
ScanState run_cycle(const ScanState& state, std::shared_ptr<const Program> program, const Stimulus& stimulus);

}  // namespace maspc::st
