#include "maspc/st/program.hpp"

#include <functional>
#include <map>
#include <set>

#include "maspc/identifier.hpp"
#include "maspc/st/parser.hpp"

namespace maspc::st {

std::optional<ExprType> unify(ExprType a, ExprType b) {
  if (a.literal && b.literal) {
    if (a.type == DataType::Bool || b.type == DataType::Bool) {
      if (a.type != b.type) return std::nullopt;
      return ExprType{DataType::Bool, true};
    }
    if (is_integer(a.type) && is_integer(b.type)) return ExprType{DataType::Dint, true};
    return ExprType{DataType::Lreal, true};
  }
  if (a.literal) return assignable(a, b.type) ? std::optional<ExprType>(ExprType{b.type, false}) : std::nullopt;
  if (b.literal) return assignable(b, a.type) ? std::optional<ExprType>(ExprType{a.type, false}) : std::nullopt;
  if (a.type == b.type) return a;
  if (widens_to(a.type, b.type)) return b;
  if (widens_to(b.type, a.type)) return a;
  return std::nullopt;
}

bool assignable(ExprType src, DataType dst) {
  if (src.literal) {
    if (src.type == DataType::Bool || dst == DataType::Bool) return src.type == dst;
    if (is_integer(src.type)) return true;  // range is checked when the value is known
    return is_real(dst);
  }
  return src.type == dst || widens_to(src.type, dst);
}

std::optional<Intrinsic> find_intrinsic(std::string_view upper_name) {
  if (upper_name == "INT_TO_DINT") return Intrinsic::IntToDint;
  if (upper_name == "REAL_TO_LREAL") return Intrinsic::RealToLreal;
  if (upper_name == "INT_TO_REAL") return Intrinsic::IntToReal;
  if (upper_name == "REAL_TO_INT") return Intrinsic::RealToInt;
  return std::nullopt;
}

DataType intrinsic_arg_type(Intrinsic f) {
  switch (f) {
    case Intrinsic::IntToDint:
    case Intrinsic::IntToReal: return DataType::Int;
    case Intrinsic::RealToLreal:
    case Intrinsic::RealToInt: return DataType::Real;
  }
  return DataType::Int;
}

DataType intrinsic_result_type(Intrinsic f) {
  switch (f) {
    case Intrinsic::IntToDint: return DataType::Dint;
    case Intrinsic::RealToLreal: return DataType::Lreal;
    case Intrinsic::IntToReal: return DataType::Real;
    case Intrinsic::RealToInt: return DataType::Int;
  }
  return DataType::Int;
}

namespace {

class Checker {
 public:
  explicit Checker(const Program& prog) : prog_(prog) {}

  void check_pou(const Pou& pou) {
    pou_ = &pou;
    for (const auto& v : pou.vars) {
      if (v.type) continue;
      const Pou* t = prog_.find(v.type_name);
      if (!t || t->kind != PouKind::FunctionBlock)
        fail(v.pos, "'" + v.type_name + "' is not a data type or FUNCTION_BLOCK");
      if (pou.kind == PouKind::Function) fail(v.pos, "a FUNCTION cannot hold function block instances");
    }
    body(pou.body);
  }

 private:
  [[noreturn]] void fail(SourcePos pos, const std::string& msg) const {
    throw Error("E_ST_SEMANTIC", pou_->name + ":" + std::to_string(pos.line) + ":" +
                                     std::to_string(pos.column) + ": " + msg);
  }

  void body(const std::vector<Stmt>& stmts) {
    for (const auto& s : stmts) statement(s);
  }

  void statement(const Stmt& s) {
    if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
      const DataType target = scalar_path(a->target, s.pos);
      const ExprType src = infer(*a->value);
      if (!assignable(src, target))
        fail(s.pos, std::string("cannot assign ") + to_string(src.type) + " to " + to_string(target) + " '" +
                        a->target.text() + "'");
    } else if (const auto* c = std::get_if<CallStmt>(&s.node)) {
      if (const Pou* fb = fb_path(c->callee)) {
        formal_args(*fb, c->args, s.pos);
      } else if (c->callee.parts.size() == 1) {
        const Pou* fn = prog_.find(c->callee.parts[0]);
        if (!fn || fn->kind != PouKind::Function) fail(s.pos, "'" + c->callee.text() + "' is not callable");
        call_args(*fn, c->args, s.pos);
      } else {
        fail(s.pos, "'" + c->callee.text() + "' is not a function block instance");
      }
    } else {
      const auto& i = std::get<IfStmt>(s.node);
      for (const auto& b : i.branches) {
        if (infer(*b.condition).type != DataType::Bool) fail(b.condition->pos, "IF condition must be BOOL");
        body(b.body);
      }
      body(i.else_body);
    }
  }

  /// Resolves a dotted path to a scalar variable; returns its type.
  DataType scalar_path(const NameExpr& n, SourcePos pos) const {
    const Pou* scope = pou_;
    for (std::size_t i = 0; i < n.upper.size(); ++i) {
      const bool last = i + 1 == n.upper.size();
      if (scope == pou_ && i == 0 && last && pou_->kind == PouKind::Function && n.upper[0] == pou_->upper)
        return *pou_->return_type;
      const VarDecl* v = scope->find_var(n.upper[i]);
      if (!v) fail(pos, "undeclared name '" + n.text() + "'");
      if (last) {
        if (!v->type) fail(pos, "'" + n.text() + "' is a function block instance, not a value");
        return *v->type;
      }
      if (v->type) fail(pos, "'" + n.parts[i] + "' has no members");
      scope = prog_.find(v->type_name);
    }
    fail(pos, "empty name");
  }

  /// Resolves a dotted path to an FB instance; nullptr if it names something else.
  const Pou* fb_path(const NameExpr& n) const {
    const Pou* scope = pou_;
    for (std::size_t i = 0; i < n.upper.size(); ++i) {
      const VarDecl* v = scope->find_var(n.upper[i]);
      if (!v || v->type) return nullptr;
      scope = prog_.find(v->type_name);
    }
    return scope;
  }

  void formal_args(const Pou& callee, const std::vector<Argument>& args, SourcePos pos) {
    std::set<std::string> seen;
    for (const auto& a : args) {
      if (a.name.empty()) fail(pos, "function block calls take formal arguments (name := value)");
      const VarDecl* v = callee.find_var(a.upper);
      if (!v || v->section != VarSection::Input) fail(pos, "'" + a.name + "' is not an input of " + callee.name);
      if (!seen.insert(a.upper).second) fail(pos, "argument '" + a.name + "' bound twice");
      const ExprType t = infer(*a.value);
      if (!assignable(t, *v->type)) fail(a.value->pos, "argument '" + a.name + "' has incompatible type");
    }
  }

  /// FUNCTION call arguments: all formal or all positional (in VAR_INPUT order).
  void call_args(const Pou& fn, const std::vector<Argument>& args, SourcePos pos) {
    const bool positional = !args.empty() && args.front().name.empty();
    for (const auto& a : args)
      if (a.name.empty() != positional) fail(pos, "cannot mix formal and positional arguments");
    if (!positional) {
      formal_args(fn, args, pos);
      return;
    }
    std::vector<const VarDecl*> inputs;
    for (const auto& v : fn.vars)
      if (v.section == VarSection::Input) inputs.push_back(&v);
    if (args.size() > inputs.size()) fail(pos, "too many arguments for " + fn.name);
    for (std::size_t i = 0; i < args.size(); ++i)
      if (!assignable(infer(*args[i].value), *inputs[i]->type))
        fail(args[i].value->pos, "argument " + std::to_string(i + 1) + " of " + fn.name + " has incompatible type");
  }

  ExprType infer(const Expr& e) {
    return std::visit([&](const auto& n) { return infer_node(n, e.pos); }, e.node);
  }

  ExprType infer_node(const LiteralExpr& l, SourcePos) { return {type_of(l.value), l.untyped}; }

  ExprType infer_node(const NameExpr& n, SourcePos pos) { return {scalar_path(n, pos), false}; }

  ExprType infer_node(const UnaryExpr& u, SourcePos pos) {
    const ExprType t = infer(*u.operand);
    if (u.op == UnaryOp::Not) {
      if (t.type != DataType::Bool) fail(pos, "NOT requires BOOL");
      return {DataType::Bool, false};
    }
    if (t.type == DataType::Bool) fail(pos, "arithmetic on BOOL");
    return t;
  }

  ExprType infer_node(const BinaryExpr& b, SourcePos pos) {
    const ExprType l = infer(*b.lhs);
    const ExprType r = infer(*b.rhs);
    switch (b.op) {
      case BinaryOp::And:
      case BinaryOp::Or:
      case BinaryOp::Xor:
        if (l.type != DataType::Bool || r.type != DataType::Bool)
          fail(pos, std::string(to_string(b.op)) + " requires BOOL operands");
        return {DataType::Bool, false};
      default: break;
    }
    auto u = unify(l, r);
    if (!u)
      fail(pos, std::string("incompatible operand types ") + to_string(l.type) + " " + to_string(b.op) + " " +
                    to_string(r.type));
    switch (b.op) {
      case BinaryOp::Eq:
      case BinaryOp::Ne: return {DataType::Bool, false};
      case BinaryOp::Lt:
      case BinaryOp::Le:
      case BinaryOp::Gt:
      case BinaryOp::Ge:
        if (u->type == DataType::Bool) fail(pos, "ordering comparison on BOOL");
        return {DataType::Bool, false};
      case BinaryOp::Mod:
        if (!is_integer(u->type)) fail(pos, "MOD requires integer operands");
        return *u;
      default:
        if (u->type == DataType::Bool) fail(pos, "arithmetic on BOOL");
        return *u;
    }
  }

  ExprType infer_node(const CallExpr& c, SourcePos pos) {
    if (auto f = find_intrinsic(c.upper)) {
      if (c.args.size() != 1 || (!c.args[0].name.empty() && c.args[0].upper != "IN"))
        fail(pos, c.callee + " takes exactly one argument");
      const ExprType t = infer(*c.args[0].value);
      const DataType want = intrinsic_arg_type(*f);
      if (!(t.literal ? assignable(t, want) : t.type == want))
        fail(pos, c.callee + " expects " + to_string(want));
      return {intrinsic_result_type(*f), false};
    }
    const Pou* fn = prog_.find(c.callee);
    if (!fn || fn->kind != PouKind::Function) fail(pos, "'" + c.callee + "' is not a FUNCTION");
    call_args(*fn, c.args, pos);
    return {*fn->return_type, false};
  }

  const Program& prog_;
  const Pou* pou_ = nullptr;
};

template <typename Fn>
void for_each_call(const Expr& e, Fn&& fn) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, UnaryExpr>) {
          for_each_call(*n.operand, fn);
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          for_each_call(*n.lhs, fn);
          for_each_call(*n.rhs, fn);
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          fn(n);
          for (const auto& a : n.args) for_each_call(*a.value, fn);
        }
      },
      e.node);
}

}  // namespace

const Pou* Program::find(std::string_view name) const {
  const std::string upper = to_upper(name);
  for (const auto& p : pous_)
    if (p.upper == upper) return &p;
  return nullptr;
}

std::shared_ptr<const Program> Program::from_sources(std::span<const std::string> sources,
                                                     std::string_view main_name) {
  std::vector<Pou> all;
  for (const auto& src : sources) {
    auto units = parse_units(src);
    for (auto& u : units) all.push_back(std::move(u));
  }
  return load(std::move(all), main_name);
}

std::shared_ptr<const Program> Program::load(std::vector<Pou> pous, std::string_view main_name) {
  std::shared_ptr<Program> p(new Program());
  p->pous_ = std::move(pous);
  std::set<std::string> names;
  for (const auto& pou : p->pous_)
    if (!names.insert(pou.upper).second) throw Error("E_ST_SEMANTIC", "duplicate POU '" + pou.name + "'");
  if (main_name.empty()) {
    p->main_ = kNoMain;
  } else {
    const Pou* main = p->find(main_name);
    if (!main) throw Error("E_ST_SEMANTIC", "entry POU '" + std::string(main_name) + "' not found");
    if (main->kind == PouKind::Function) throw Error("E_ST_SEMANTIC", "entry POU cannot be a FUNCTION");
    p->main_ = static_cast<std::size_t>(main - p->pous_.data());
  }
  p->check();
  return p;
}

void Program::check() {
  // Instance recursion and function recursion both make a scan unbounded.
  enum class Mark { None, Active, Done };
  std::map<const Pou*, Mark> marks;
  std::function<void(const Pou&)> visit = [&](const Pou& pou) {
    marks[&pou] = Mark::Active;
    auto dep = [&](const Pou* d) {
      if (!d) return;
      if (marks[d] == Mark::Active)
        throw Error("E_ST_SEMANTIC", "recursive use of '" + d->name + "' from '" + pou.name + "'");
      if (marks[d] == Mark::None) visit(*d);
    };
    for (const auto& v : pou.vars)
      if (!v.type) dep(find(v.type_name));
    for_each_stmt(pou.body, [&](const Stmt& s) {
      auto exprs = [&](const Expr& e) { for_each_call(e, [&](const CallExpr& c) { dep(find(c.callee)); }); };
      if (const auto* a = std::get_if<AssignStmt>(&s.node)) exprs(*a->value);
      if (const auto* c = std::get_if<CallStmt>(&s.node)) {
        if (c->callee.parts.size() == 1) {
          const Pou* f = find(c->callee.parts[0]);
          if (f && f->kind == PouKind::Function) dep(f);
        }
        for (const auto& a : c->args) exprs(*a.value);
      }
      if (const auto* i = std::get_if<IfStmt>(&s.node))
        for (const auto& b : i->branches) exprs(*b.condition);
    });
    marks[&pou] = Mark::Done;
  };
  for (const auto& pou : pous_)
    if (marks[&pou] == Mark::None) visit(pou);

  Checker checker(*this);
  for (const auto& pou : pous_) checker.check_pou(pou);
  bound_ = main_ == kNoMain ? 0 : expanded_count(main());
}

std::size_t Program::expanded_count(const Pou& pou) const {
  std::size_t n = 0;
  auto calls_in = [&](const Expr& e) {
    for_each_call(e, [&](const CallExpr& c) {
      if (const Pou* f = find(c.callee)) n += expanded_count(*f);
    });
  };
  for_each_stmt(pou.body, [&](const Stmt& s) {
    ++n;
    if (const auto* a = std::get_if<AssignStmt>(&s.node)) calls_in(*a->value);
    if (const auto* c = std::get_if<CallStmt>(&s.node)) {
      for (const auto& a : c->args) calls_in(*a.value);
      // Resolve the callee through the instance path.
      const Pou* scope = &pou;
      const Pou* target = nullptr;
      for (std::size_t i = 0; i < c->callee.upper.size() && scope; ++i) {
        const VarDecl* v = scope->find_var(c->callee.upper[i]);
        if (!v || v->type) {
          scope = nullptr;
          break;
        }
        scope = find(v->type_name);
      }
      target = scope ? scope : (c->callee.parts.size() == 1 ? find(c->callee.parts[0]) : nullptr);
      if (target) n += expanded_count(*target);
    }
    if (const auto* i = std::get_if<IfStmt>(&s.node))
      for (const auto& b : i->branches) calls_in(*b.condition);
  });
  return n;
}

}  // namespace maspc::st
