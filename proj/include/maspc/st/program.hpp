#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maspc/error.hpp"
#include "maspc/st/ast.hpp"

namespace maspc::st {

/// Static type of an expression. Untyped literals adopt the type of the
/// other operand or of the assignment target.
struct ExprType {
  DataType type = DataType::Bool;
  bool literal = false;
};

/// Result type of combining two operands; nullopt when incompatible.
std::optional<ExprType> unify(ExprType a, ExprType b);

/// Whether a value of static type `src` may be stored in `dst` (equal type,
/// lossless widening, or a literal that converts).
bool assignable(ExprType src, DataType dst);

enum class Intrinsic { IntToDint, RealToLreal, IntToReal, RealToInt };

std::optional<Intrinsic> find_intrinsic(std::string_view upper_name);
DataType intrinsic_arg_type(Intrinsic f);
DataType intrinsic_result_type(Intrinsic f);

/// A set of POUs that passed static checking: every name declared, every
/// expression well-typed, no recursion through FB instances or FC calls.
/// Errors raise maspc::Error with code E_ST_SEMANTIC.
class Program {
 public:
  /// An empty `main_name` loads a library: POUs are checked but there is no
  /// entry point and main() must not be called.
  static std::shared_ptr<const Program> load(std::vector<Pou> pous, std::string_view main_name = "Main");

  /// Parses every source text (each may hold several units) and loads them.
  static std::shared_ptr<const Program> from_sources(std::span<const std::string> sources,
                                                    std::string_view main_name = "Main");

  const Pou& main() const { return pous_[main_]; }
  const Pou* find(std::string_view name) const;
  const std::vector<Pou>& pous() const { return pous_; }

  /// Upper bound of statements executed in one scan of main(): every
  /// statement site counted once per invocation path, including FB bodies
  /// and FC bodies reached from call expressions.
  std::size_t static_statement_bound() const { return bound_; }

  /// Static statement count of one POU body, expanded through calls.
  std::size_t expanded_count(const Pou& pou) const;

 private:
  static constexpr std::size_t kNoMain = static_cast<std::size_t>(-1);

  Program() = default;
  void check();

  std::vector<Pou> pous_;
  std::size_t main_ = 0;
  std::size_t bound_ = 0;
};

}  // namespace maspc::st
