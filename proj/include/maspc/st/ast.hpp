#pragma once

// Abstract syntax for the loop-free Structured Text subset: assignments,
// IF/ELSIF/ELSE, FB-instance calls and FC call expressions. The grammar has
// no iteration constructs at all.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "maspc/st/value.hpp"

namespace maspc::st {

struct SourcePos {
  int line = 1;
  int column = 1;
};

enum class UnaryOp { Neg, Not };
enum class BinaryOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Xor };

const char* to_string(BinaryOp op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

/// `untyped` marks a plain numeric literal whose type is taken from context
/// (ANY_INT / ANY_REAL); untyped integers are held as DINT, reals as LREAL.
struct LiteralExpr {
  Value value;
  bool untyped = false;
};

/// Dotted variable reference, e.g. `fb1.y`.
struct NameExpr {
  std::vector<std::string> parts;  // as written
  std::vector<std::string> upper;  // upper-cased, for lookup

  std::string text() const;
};

struct UnaryExpr {
  UnaryOp op;
  ExprPtr operand;
};

struct BinaryExpr {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

/// Call argument. `name` is empty for positional arguments.
struct Argument {
  std::string name;
  std::string upper;
  ExprPtr value;
};

struct CallExpr {
  std::string callee;
  std::string upper;
  std::vector<Argument> args;
};

struct Expr {
  std::variant<LiteralExpr, NameExpr, UnaryExpr, BinaryExpr, CallExpr> node;
  SourcePos pos;
};

struct Stmt;

struct AssignStmt {
  NameExpr target;
  ExprPtr value;
};

/// `inst(a := x);` for FB instances, or a function call whose result is
/// discarded.
struct CallStmt {
  NameExpr callee;
  std::vector<Argument> args;
};

struct IfBranch {
  ExprPtr condition;
  std::vector<Stmt> body;
};

struct IfStmt {
  std::vector<IfBranch> branches;  // IF + ELSIFs
  std::vector<Stmt> else_body;
};

struct Stmt {
  std::variant<AssignStmt, CallStmt, IfStmt> node;
  SourcePos pos;
  /// Pre-order position within the owning body; breakpoints address this.
  std::size_t index = 0;
};

struct StatementList {
  std::vector<Stmt> statements;
  std::size_t statement_count = 0;  // including nested statements
};

enum class PouKind { Program, FunctionBlock, Function };
enum class VarSection { Input, Output, Local };

const char* to_string(PouKind k);

struct VarDecl {
  std::string name;
  std::string upper;
  std::string type_name;
  std::optional<DataType> type;  // nullopt => function-block instance
  VarSection section = VarSection::Local;
  std::optional<Value> init;
  SourcePos pos;
};

/// Program organisation unit: PROGRAM, FUNCTION_BLOCK or FUNCTION.
struct Pou {
  PouKind kind = PouKind::Program;
  std::string name;
  std::string upper;
  std::optional<DataType> return_type;  // FUNCTION only
  std::vector<VarDecl> vars;
  std::vector<Stmt> body;
  std::size_t statement_count = 0;
  std::unordered_map<std::string, std::size_t> var_index;  // upper name -> vars index
  SourcePos pos;

  const VarDecl* find_var(const std::string& upper_name) const {
    auto it = var_index.find(upper_name);
    return it == var_index.end() ? nullptr : &vars[it->second];
  }
};

/// Visits every statement (pre-order, nested IF bodies included).
template <typename Fn>
void for_each_stmt(const std::vector<Stmt>& body, Fn&& fn) {
  for (const auto& s : body) {
    fn(s);
    if (const auto* i = std::get_if<IfStmt>(&s.node)) {
      for (const auto& b : i->branches) for_each_stmt(b.body, fn);
      for_each_stmt(i->else_body, fn);
    }
  }
}

}  // namespace maspc::st
