#pragma once

#include <string_view>
#include <vector>

#include "maspc/error.hpp"
#include "maspc/st/ast.hpp"

namespace maspc::st {

/// E_ST_SYNTAX or E_LOOP_FORBIDDEN, positioned at the offending token.
class SyntaxError : public Error {
 public:
  SyntaxError(std::string code, SourcePos pos, const std::string& message)
      : Error(std::move(code), std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
        pos_(pos) {}

  SourcePos pos() const noexcept { return pos_; }

 private:
  SourcePos pos_;
};

/// Parses a bare statement list. FOR/WHILE/REPEAT/GOTO (and their END_ and
/// UNTIL/EXIT companions) raise E_LOOP_FORBIDDEN anywhere outside comments.
StatementList parse_st(std::string_view text);

/// Parses one or more PROGRAM / FUNCTION_BLOCK / FUNCTION units.
std::vector<Pou> parse_units(std::string_view text);

/// True iff the source contains an iteration keyword outside comments.
bool contains_loop_token(std::string_view text);

/// Identifier-token rewrite: replaces every standalone identifier equal
/// (case-insensitively) to `from` with `to`, leaving member accesses
/// (`x.from`), comments and all other text untouched.
std::string rename_identifier(std::string_view text, std::string_view from, std::string_view to);

}  // namespace maspc::st
