#include "maspc/st/runtime.hpp"

#include <cmath>
#include <functional>
#include <type_traits>

#include "maspc/identifier.hpp"

namespace maspc::st {

namespace {

template <typename T>
T arith(BinaryOp op, T a, T b, const std::function<void(const char*)>& fail) {
  if constexpr (std::is_integral_v<T>) {
    // Computed wide, then wrapped to the operand width.
    const std::int64_t x = a, y = b;
    std::int64_t r = 0;
    switch (op) {
      case BinaryOp::Add: r = x + y; break;
      case BinaryOp::Sub: r = x - y; break;
      case BinaryOp::Mul: r = x * y; break;
      case BinaryOp::Div:
        if (y == 0) fail("division by zero");
        r = x / y;
        break;
      case BinaryOp::Mod:
        if (y == 0) fail("MOD by zero");
        r = x % y;
        break;
      default: break;
    }
    return static_cast<T>(r);
  } else {
    switch (op) {
      case BinaryOp::Add: return a + b;
      case BinaryOp::Sub: return a - b;
      case BinaryOp::Mul: return a * b;
      case BinaryOp::Div:
        if (b == 0) fail("division by zero");
        return a / b;
      default: return T{};
    }
  }
}

template <typename T>
bool compare(BinaryOp op, T a, T b) {
  switch (op) {
    case BinaryOp::Eq: return a == b;
    case BinaryOp::Ne: return a != b;
    case BinaryOp::Lt: return a < b;
    case BinaryOp::Le: return a <= b;
    case BinaryOp::Gt: return a > b;
    case BinaryOp::Ge: return a >= b;
    default: return false;
  }
}

bool is_comparison(BinaryOp op) {
  switch (op) {
    case BinaryOp::Eq:
    case BinaryOp::Ne:
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return true;
    default: return false;
  }
}

}  // namespace

NodeRuntime::NodeRuntime(std::shared_ptr<const Program> program, std::string node_id)
    : program_(std::move(program)), node_id_(std::move(node_id)) {
  root_ = instantiate(program_->main(), program_->main().name);
  index_variables(*root_);
}

std::unique_ptr<Instance> NodeRuntime::instantiate(const Pou& pou, std::string path) {
  auto inst = std::make_unique<Instance>();
  inst->pou = &pou;
  inst->path = std::move(path);
  inst->vars.reserve(pou.vars.size());
  inst->children.resize(pou.vars.size());
  for (std::size_t i = 0; i < pou.vars.size(); ++i) {
    const VarDecl& d = pou.vars[i];
    if (d.type) {
      inst->vars.push_back(d.init ? *d.init : default_value(*d.type));
    } else {
      inst->vars.push_back(false);
      inst->children[i] = instantiate(*program_->find(d.type_name), inst->path + "." + d.name);
    }
  }
  inst->forced.resize(inst->vars.size());
  return inst;
}

void NodeRuntime::index_variables(Instance& inst) {
  for (std::size_t i = 0; i < inst.pou->vars.size(); ++i) {
    if (inst.children[i]) {
      index_variables(*inst.children[i]);
      continue;
    }
    std::string name = inst.path + "." + inst.pou->vars[i].name;
    by_upper_name_.emplace(to_upper(name), VarRef{&inst, i});
    variables_.emplace_back(std::move(name), VarRef{&inst, i});
  }
}

Instance* NodeRuntime::instance_at(std::string_view path) const {
  const std::string upper = to_upper(path);
  std::function<Instance*(Instance&)> walk = [&](Instance& inst) -> Instance* {
    if (to_upper(inst.path) == upper) return &inst;
    for (auto& c : inst.children)
      if (c)
        if (Instance* hit = walk(*c)) return hit;
    return nullptr;
  };
  return walk(*root_);
}

std::optional<VarRef> NodeRuntime::find(std::string_view name) const {
  auto it = by_upper_name_.find(to_upper(name));
  if (it == by_upper_name_.end()) return std::nullopt;
  return it->second;
}

void NodeRuntime::write(VarRef ref, const Value& v) {
  auto& forced = ref.instance->forced[ref.slot];
  ref.instance->vars[ref.slot] = forced ? *forced : v;
}

void NodeRuntime::force(VarRef ref, const Value& v) {
  ref.instance->forced[ref.slot] = v;
  ref.instance->vars[ref.slot] = v;
}

void NodeRuntime::unforce(VarRef ref) { ref.instance->forced[ref.slot].reset(); }

std::string NodeRuntime::name_of(VarRef ref) const {
  return ref.instance->path + "." + ref.instance->pou->vars[ref.slot].name;
}

std::map<std::string, Value> NodeRuntime::image() const {
  std::map<std::string, Value> out;
  for (const auto& [name, ref] : variables_) out.emplace(name, read(ref));
  return out;
}

void NodeRuntime::apply(const Stimulus& stimulus) {
  for (const auto& [name, v] : stimulus) {
    auto ref = find(name);
    if (!ref) throw Error("E_UNKNOWN_NAME", "no variable '" + name + "' on node " + node_id_);
    if (ref->type() != type_of(v))
      throw Error("E_BAD_VALUE", "'" + name + "' is " + std::string(to_string(ref->type())) + ", got " +
                                     to_string(type_of(v)));
    write(*ref, v);
  }
}

bool NodeRuntime::set_breakpoint(std::string_view artifact, std::size_t statement_index) {
  const Pou* pou = program_->find(artifact);
  if (!pou || pou->kind == PouKind::Function) return false;
  const Stmt* hit = nullptr;
  for_each_stmt(pou->body, [&](const Stmt& s) {
    if (s.index == statement_index) hit = &s;
  });
  if (!hit) return false;
  breakpoints_.insert(hit);
  breakpoint_keys_[{pou->name, statement_index}] = hit;
  return true;
}

bool NodeRuntime::clear_breakpoint(std::string_view artifact, std::size_t statement_index) {
  const Pou* pou = program_->find(artifact);
  if (!pou) return false;
  auto it = breakpoint_keys_.find({pou->name, statement_index});
  if (it == breakpoint_keys_.end()) return false;
  breakpoints_.erase(it->second);
  breakpoint_keys_.erase(it);
  return true;
}

std::set<std::pair<std::string, std::size_t>> NodeRuntime::breakpoints() const {
  std::set<std::pair<std::string, std::size_t>> out;
  for (const auto& [key, stmt] : breakpoint_keys_) out.insert(key);
  return out;
}

void NodeRuntime::begin_scan() {
  if (in_scan_) return;
  stack_.clear();
  stack_.push_back(Frame{root_.get(), {Cursor{&root_->pou->body, 0}}});
  in_scan_ = true;
  skip_breakpoint_ = false;
  executed_ = 0;
}

std::optional<NodeRuntime::NextStmt> NodeRuntime::next_statement() const {
  for (std::size_t f = stack_.size(); f-- > 0;) {
    const auto& cursors = stack_[f].cursors;
    for (std::size_t c = cursors.size(); c-- > 0;)
      if (cursors[c].next < cursors[c].list->size()) return NextStmt{f, &(*cursors[c].list)[cursors[c].next]};
  }
  return std::nullopt;
}

void NodeRuntime::unwind() {
  while (!stack_.empty()) {
    auto& cursors = stack_.back().cursors;
    while (!cursors.empty() && cursors.back().next >= cursors.back().list->size()) cursors.pop_back();
    if (!cursors.empty()) return;
    stack_.pop_back();
  }
}

bool NodeRuntime::finish_if_done() {
  if (!in_scan_ || next_statement()) return false;
  stack_.clear();
  in_scan_ = false;
  skip_breakpoint_ = false;
  ++cycle_counter_;
  return true;
}

std::optional<PauseLocation> NodeRuntime::location() const {
  if (!in_scan_) return std::nullopt;
  auto next = next_statement();
  if (!next) return std::nullopt;
  const Instance* inst = stack_[next->frame].instance;
  return PauseLocation{inst->pou->name, next->stmt->index, inst->path};
}

StepResult NodeRuntime::step(bool honor_breakpoints) {
  begin_scan();
  if (finish_if_done()) return StepResult::ScanComplete;
  unwind();
  Frame& frame = stack_.back();
  Cursor& cursor = frame.cursors.back();
  const Stmt& stmt = (*cursor.list)[cursor.next];
  if (honor_breakpoints && !skip_breakpoint_ && breakpoints_.count(&stmt)) {
    skip_breakpoint_ = true;
    return StepResult::BreakpointHit;
  }
  skip_breakpoint_ = false;
  ++cursor.next;
  current_pou_ = frame.instance->pou;
  current_index_ = stmt.index;
  ++executed_;
  const std::size_t depth = stack_.size();
  const std::size_t nested = frame.cursors.size();
  try {
    execute(depth - 1, stmt);
  } catch (const RuntimeError&) {
    // Stay on the faulting statement so a resumed scan raises it again.
    stack_.resize(depth);
    stack_.back().cursors.resize(nested);
    --stack_.back().cursors.back().next;
    --executed_;
    throw;
  }
  return StepResult::Executed;
}

StepResult NodeRuntime::run_to_end(bool honor_breakpoints) {
  for (;;) {
    const StepResult r = step(honor_breakpoints);
    if (r != StepResult::Executed) return r;
  }
}

void NodeRuntime::execute(std::size_t frame_index, const Stmt& stmt) {
  Instance& scope = *stack_[frame_index].instance;
  if (const auto* a = std::get_if<AssignStmt>(&stmt.node)) {
    const VarRef target = resolve(scope, a->target);
    assign(target, eval(scope, *a->value));
  } else if (const auto* c = std::get_if<CallStmt>(&stmt.node)) {
    if (Instance* child = resolve_instance(scope, c->callee)) {
      for (const auto& arg : c->args)
        assign(VarRef{child, child->pou->var_index.at(arg.upper)}, eval(scope, *arg.value));
      stack_.push_back(Frame{child, {Cursor{&child->pou->body, 0}}});
    } else {
      call_function(scope, c->callee.upper[0], c->args);
    }
  } else {
    const auto& i = std::get<IfStmt>(stmt.node);
    for (const auto& b : i.branches) {
      if (std::get<bool>(eval(scope, *b.condition).value)) {
        if (!b.body.empty()) stack_[frame_index].cursors.push_back(Cursor{&b.body, 0});
        return;
      }
    }
    if (!i.else_body.empty()) stack_[frame_index].cursors.push_back(Cursor{&i.else_body, 0});
  }
}


void NodeRuntime::execute_atomic(Instance& scope, const std::vector<Stmt>& body) {
  for (const auto& stmt : body) {
    current_index_ = stmt.index;
    ++executed_;
    if (const auto* a = std::get_if<AssignStmt>(&stmt.node)) {
      const VarRef target = resolve(scope, a->target);
      assign(target, eval(scope, *a->value));
    } else if (const auto* c = std::get_if<CallStmt>(&stmt.node)) {
      call_function(scope, c->callee.upper[0], c->args);
    } else {
      const auto& i = std::get<IfStmt>(stmt.node);
      const std::vector<Stmt>* chosen = &i.else_body;
      for (const auto& b : i.branches)
        if (std::get<bool>(eval(scope, *b.condition).value)) {
          chosen = &b.body;
          break;
        }
      execute_atomic(scope, *chosen);
    }
  }
}

VarRef NodeRuntime::resolve(Instance& scope, const NameExpr& name) const {
  Instance* cur = &scope;
  const std::size_t n = name.upper.size();
  if (n == 1 && scope.pou->kind == PouKind::Function && name.upper[0] == scope.pou->upper)
    return VarRef{&scope, scope.vars.size() - 1};
  for (std::size_t i = 0; i + 1 < n; ++i) cur = cur->children[cur->pou->var_index.at(name.upper[i])].get();
  return VarRef{cur, cur->pou->var_index.at(name.upper[n - 1])};
}

Instance* NodeRuntime::resolve_instance(Instance& scope, const NameExpr& name) const {
  Instance* cur = &scope;
  for (const auto& part : name.upper) {
    auto it = cur->pou->var_index.find(part);
    if (it == cur->pou->var_index.end() || !cur->children[it->second]) return nullptr;
    cur = cur->children[it->second].get();
  }
  return cur;
}

void NodeRuntime::assign(VarRef target, const Operand& v) { write(target, coerce(v, target.type())); }

Value NodeRuntime::coerce(const Operand& v, DataType target) const {
  const DataType src = type_of(v.value);
  if (src == target) return v.value;
  if (src == DataType::Int && target == DataType::Dint) return static_cast<std::int32_t>(std::get<std::int16_t>(v.value));
  if (src == DataType::Real && target == DataType::Lreal) return static_cast<double>(std::get<float>(v.value));
  if (v.literal) {
    if (src == DataType::Dint) {
      const std::int32_t x = std::get<std::int32_t>(v.value);
      switch (target) {
        case DataType::Int:
          if (x < INT16_MIN || x > INT16_MAX) runtime_error("literal " + std::to_string(x) + " out of INT range");
          return static_cast<std::int16_t>(x);
        case DataType::Real: return static_cast<float>(x);
        case DataType::Lreal: return static_cast<double>(x);
        default: break;
      }
    } else if (src == DataType::Lreal && target == DataType::Real) {
      return static_cast<float>(std::get<double>(v.value));
    }
  }
  runtime_error(std::string("cannot convert ") + to_string(src) + " to " + to_string(target));
}

NodeRuntime::Operand NodeRuntime::eval(Instance& scope, const Expr& e) {
  if (const auto* l = std::get_if<LiteralExpr>(&e.node)) return {l->value, l->untyped};
  if (const auto* n = std::get_if<NameExpr>(&e.node)) return {read(resolve(scope, *n)), false};
  if (const auto* c = std::get_if<CallExpr>(&e.node)) return call_function(scope, c->upper, c->args);
  if (const auto* u = std::get_if<UnaryExpr>(&e.node)) {
    Operand v = eval(scope, *u->operand);
    if (u->op == UnaryOp::Not) return {!std::get<bool>(v.value), false};
    std::visit(
        [](auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, bool>) {
          } else if constexpr (std::is_integral_v<T>) {
            x = static_cast<T>(-static_cast<std::int64_t>(x));
          } else {
            x = -x;
          }
        },
        v.value);
    return v;
  }
  const auto& b = std::get<BinaryExpr>(e.node);
  const Operand l = eval(scope, *b.lhs);
  const Operand r = eval(scope, *b.rhs);
  if (b.op == BinaryOp::And || b.op == BinaryOp::Or || b.op == BinaryOp::Xor) {
    const bool x = std::get<bool>(l.value), y = std::get<bool>(r.value);
    const bool res = b.op == BinaryOp::And ? (x && y) : b.op == BinaryOp::Or ? (x || y) : (x != y);
    return {res, false};
  }
  const auto t = unify({type_of(l.value), l.literal}, {type_of(r.value), r.literal});
  if (!t) runtime_error("incompatible operands");
  const Value x = coerce(l, t->type);
  const Value y = coerce(r, t->type);
  auto fail = [this](const char* what) { runtime_error(what); };
  return std::visit(
      [&](auto a) -> Operand {
        using T = decltype(a);
        const T bv = std::get<T>(y);
        if (is_comparison(b.op)) return {compare(b.op, a, bv), false};
        if constexpr (std::is_same_v<T, bool>) {
          runtime_error("arithmetic on BOOL");
        } else {
          return {arith<T>(b.op, a, bv, fail), t->literal};
        }
      },
      x);
}

NodeRuntime::Operand NodeRuntime::call_function(Instance& scope, const std::string& upper,
                                                const std::vector<Argument>& args) {
  if (auto f = find_intrinsic(upper)) {
    const Value arg = coerce(eval(scope, *args[0].value), intrinsic_arg_type(*f));
    switch (*f) {
      case Intrinsic::IntToDint: return {static_cast<std::int32_t>(std::get<std::int16_t>(arg)), false};
      case Intrinsic::RealToLreal: return {static_cast<double>(std::get<float>(arg)), false};
      case Intrinsic::IntToReal: return {static_cast<float>(std::get<std::int16_t>(arg)), false};
      case Intrinsic::RealToInt: {
        const float x = std::get<float>(arg);
        if (!std::isfinite(x)) runtime_error("REAL_TO_INT of a non-finite value");
        const double r = std::nearbyint(static_cast<double>(x));
        if (r < INT16_MIN || r > INT16_MAX) runtime_error("REAL_TO_INT overflow");
        return {static_cast<std::int16_t>(r), false};
      }
    }
  }
  const Pou& fn = *program_->find(upper);
  Instance frame;
  frame.pou = &fn;
  frame.path = fn.name;
  for (const auto& d : fn.vars) frame.vars.push_back(d.init ? *d.init : default_value(*d.type));
  frame.vars.push_back(default_value(*fn.return_type));
  frame.forced.resize(frame.vars.size());
  frame.children.resize(frame.vars.size());

  std::vector<std::size_t> inputs;
  for (std::size_t i = 0; i < fn.vars.size(); ++i)
    if (fn.vars[i].section == VarSection::Input) inputs.push_back(i);
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::size_t slot = args[i].name.empty() ? inputs[i] : fn.var_index.at(args[i].upper);
    frame.vars[slot] = coerce(eval(scope, *args[i].value), *fn.vars[slot].type);
  }

  const Pou* saved_pou = current_pou_;
  const std::size_t saved_index = current_index_;
  current_pou_ = &fn;
  execute_atomic(frame, fn.body);
  current_pou_ = saved_pou;
  current_index_ = saved_index;
  return {frame.vars.back(), false};
}

void NodeRuntime::runtime_error(const std::string& what) const {
  throw RuntimeError(current_pou_ ? current_pou_->name : node_id_, current_index_, what);
}

ScanState NodeRuntime::state() const {
  ScanState s;
  s.node_id = node_id_;
  s.cycle_counter = cycle_counter_;
  s.variable_image = image();
  for (const auto& [name, ref] : variables_)
    if (const auto& f = ref.instance->forced[ref.slot]) s.forces.emplace(name, *f);
  s.breakpoints = breakpoints();
  s.mode = in_scan_ ? Mode::Paused : Mode::Running;
  s.pause = location();
  if (in_scan_) {
    ExecutionCursor c;
    for (const auto& f : stack_) {
      ExecutionCursor::Frame out{f.instance->path, {}};
      for (const auto& cur : f.cursors) out.cursors.emplace_back(cur.list, cur.next);
      c.frames.push_back(std::move(out));
    }
    c.skip_breakpoint = skip_breakpoint_;
    s.cursor = std::move(c);
  }
  return s;
}

void NodeRuntime::restore(const ScanState& s) {
  cycle_counter_ = s.cycle_counter;
  for (const auto& [name, ref] : variables_) ref.instance->forced[ref.slot].reset();
  for (const auto& [name, v] : s.variable_image)
    if (auto ref = find(name)) ref->instance->vars[ref->slot] = v;
  for (const auto& [name, v] : s.forces)
    if (auto ref = find(name)) force(*ref, v);
  breakpoints_.clear();
  breakpoint_keys_.clear();
  for (const auto& [artifact, index] : s.breakpoints) set_breakpoint(artifact, index);
  stack_.clear();
  in_scan_ = false;
  skip_breakpoint_ = false;
  if (s.cursor) {
    for (const auto& f : s.cursor->frames) {
      Instance* inst = instance_at(f.instance);
      if (!inst) throw Error("E_BAD_STATE", "saved cursor names unknown instance '" + f.instance + "'");
      Frame frame{inst, {}};
      for (const auto& [list, next] : f.cursors) frame.cursors.push_back(Cursor{list, next});
      stack_.push_back(std::move(frame));
    }
    in_scan_ = true;
    skip_breakpoint_ = s.cursor->skip_breakpoint;
  }
}

ScanState run_cycle(const ScanState& state, std::shared_ptr<const Program> program, const Stimulus& stimulus) {
  NodeRuntime rt(std::move(program), state.node_id);
  rt.restore(state);
  if (!rt.in_scan()) rt.apply(stimulus);
  rt.run_to_end(true);
  return rt.state();
}

}  // namespace maspc::st
