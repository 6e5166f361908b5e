#include "maspc/st/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "maspc/identifier.hpp"

namespace maspc::st {

const char* to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "MOD";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "<>";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "AND";
    case BinaryOp::Or: return "OR";
    case BinaryOp::Xor: return "XOR";
  }
  return "?";
}

const char* to_string(PouKind k) {
  switch (k) {
    case PouKind::Program: return "PROGRAM";
    case PouKind::FunctionBlock: return "FUNCTION_BLOCK";
    case PouKind::Function: return "FUNCTION";
  }
  return "?";
}

std::string NameExpr::text() const {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '.';
    out += parts[i];
  }
  return out;
}

namespace {

enum class TokKind { Ident, Literal, Op, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  std::string upper;
  SourcePos pos;
  std::size_t offset = 0;
  std::size_t length = 0;
  Value value;
  bool untyped = false;
};

bool is_loop_keyword(const std::string& upper) {
  return upper == "FOR" || upper == "WHILE" || upper == "REPEAT" || upper == "GOTO" ||
         upper == "END_FOR" || upper == "END_WHILE" || upper == "END_REPEAT" || upper == "UNTIL" ||
         upper == "EXIT" || upper == "CONTINUE";
}

class Lexer {
 public:
  /// `check_loops` = false lets rename_identifier and contains_loop_token see
  /// the raw token stream.
  Lexer(std::string_view src, bool check_loops) : src_(src), check_loops_(check_loops) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t;
      t.pos = pos_;
      t.offset = i_;
      if (i_ >= src_.size()) {
        t.kind = TokKind::End;
        out.push_back(std::move(t));
        return out;
      }
      const char c = src_[i_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        lex_word(t);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else {
        lex_op(t);
      }
      t.length = i_ - t.offset;
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void fail(SourcePos p, const std::string& msg) { throw SyntaxError("E_ST_SYNTAX", p, msg); }

  char peek(std::size_t ahead = 0) const { return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0'; }

  void advance() {
    if (src_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++i_;
  }

  void skip_space_and_comments() {
    for (;;) {
      while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) advance();
      if (peek() == '(' && peek(1) == '*') {
        const SourcePos start = pos_;
        advance();
        advance();
        while (i_ < src_.size() && !(peek() == '*' && peek(1) == ')')) advance();
        if (i_ >= src_.size()) fail(start, "unterminated comment");
        advance();
        advance();
      } else if (peek() == '/' && peek(1) == '*') {
        const SourcePos start = pos_;
        advance();
        advance();
        while (i_ < src_.size() && !(peek() == '*' && peek(1) == '/')) advance();
        if (i_ >= src_.size()) fail(start, "unterminated comment");
        advance();
        advance();
      } else if (peek() == '/' && peek(1) == '/') {
        while (i_ < src_.size() && src_[i_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  std::string take_while(auto pred) {
    std::string s;
    while (i_ < src_.size() && pred(src_[i_])) {
      s.push_back(src_[i_]);
      advance();
    }
    return s;
  }

  void lex_word(Token& t) {
    t.text = take_while([](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
    t.upper = to_upper(t.text);
    if (check_loops_ && is_loop_keyword(t.upper))
      throw SyntaxError("E_LOOP_FORBIDDEN", t.pos,
                        "iteration construct '" + t.text + "' is not allowed in cyclic code");
    if (t.upper == "TRUE" || t.upper == "FALSE") {
      t.kind = TokKind::Literal;
      t.value = t.upper == "TRUE";
      return;
    }
    if (peek() == '#') {
      auto type = parse_data_type(t.upper);
      if (!type) fail(t.pos, "unknown literal type prefix '" + t.text + "'");
      advance();
      lex_typed_literal(t, *type);
      return;
    }
    t.kind = TokKind::Ident;
  }

  void lex_typed_literal(Token& t, DataType type) {
    bool negative = false;
    if (peek() == '-' || peek() == '+') {
      negative = peek() == '-';
      advance();
    }
    Token inner;
    inner.pos = pos_;
    if (std::isalpha(static_cast<unsigned char>(peek()))) {
      std::string w = to_upper(take_while([](char c) { return std::isalpha(static_cast<unsigned char>(c)); }));
      if (type != DataType::Bool || (w != "TRUE" && w != "FALSE")) fail(t.pos, "malformed typed literal");
      t.kind = TokKind::Literal;
      t.value = w == "TRUE";
      t.text = std::string(src_.substr(t.offset, i_ - t.offset));
      return;
    }
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail(t.pos, "malformed typed literal");
    lex_number(inner);
    t.kind = TokKind::Literal;
    t.untyped = false;
    t.text = std::string(src_.substr(t.offset, i_ - t.offset));
    const bool inner_real = std::holds_alternative<double>(inner.value);
    const double r = inner_real ? std::get<double>(inner.value) : std::get<std::int32_t>(inner.value);
    const std::int64_t n = inner_real ? 0 : std::get<std::int32_t>(inner.value);
    switch (type) {
      case DataType::Bool:
        if (inner_real || (n != 0 && n != 1) || negative) fail(t.pos, "malformed BOOL literal");
        t.value = n == 1;
        return;
      case DataType::Int: {
        if (inner_real) fail(t.pos, "INT literal must be an integer");
        const std::int64_t v = negative ? -n : n;
        if (v < INT16_MIN || v > INT16_MAX) fail(t.pos, "INT literal out of range");
        t.value = static_cast<std::int16_t>(v);
        return;
      }
      case DataType::Dint: {
        if (inner_real) fail(t.pos, "DINT literal must be an integer");
        t.value = static_cast<std::int32_t>(negative ? -n : n);
        return;
      }
      case DataType::Real:
        t.value = static_cast<float>(negative ? -r : r);
        return;
      case DataType::Lreal:
        t.value = negative ? -r : r;
        return;
    }
  }

  void lex_number(Token& t) {
    auto digits = [&](auto pred) {
      std::string s;
      while (i_ < src_.size() && (pred(src_[i_]) || src_[i_] == '_')) {
        if (src_[i_] != '_') s.push_back(src_[i_]);
        advance();
      }
      return s;
    };
    auto dec = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
    std::string whole = digits(dec);
    t.kind = TokKind::Literal;
    t.untyped = true;
    if (peek() == '#') {
      const int base = std::atoi(whole.c_str());
      if (base != 2 && base != 8 && base != 16) fail(t.pos, "unsupported integer base " + whole);
      advance();
      std::string d = digits([](char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; });
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(d.data(), d.data() + d.size(), v, base);
      if (d.empty() || ec != std::errc{} || p != d.data() + d.size() || v > INT32_MAX)
        fail(t.pos, "malformed based integer literal");
      t.value = static_cast<std::int32_t>(v);
      return;
    }
    bool real = false;
    std::string text = whole;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      real = true;
      advance();
      text += "." + digits(dec);
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      real = true;
      text.push_back('e');
      advance();
      if (peek() == '+' || peek() == '-') {
        text.push_back(peek());
        advance();
      }
      text += digits(dec);
    }
    if (real) {
      t.value = std::strtod(text.c_str(), nullptr);
      return;
    }
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || v > INT32_MAX) fail(t.pos, "integer literal out of range");
    t.value = static_cast<std::int32_t>(v);
  }

  void lex_op(Token& t) {
    static constexpr std::string_view two[] = {":=", "<=", ">=", "<>", "**"};
    for (auto op : two) {
      if (src_.substr(i_, 2) == op) {
        t.kind = TokKind::Op;
        t.text = std::string(op);
        advance();
        advance();
        return;
      }
    }
    const char c = peek();
    static constexpr std::string_view one = "(),;.:+-*/=<>&";
    if (one.find(c) == std::string_view::npos) fail(t.pos, std::string("unexpected character '") + c + "'");
    t.kind = TokKind::Op;
    t.text = std::string(1, c);
    advance();
  }

  std::string_view src_;
  bool check_loops_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  StatementList statements() {
    StatementList out;
    out.statements = stmt_list({});
    expect_end();
    std::size_t next = 0;
    number(out.statements, next);
    out.statement_count = next;
    return out;
  }

  std::vector<Pou> units() {
    std::vector<Pou> out;
    while (!at_end()) out.push_back(unit());
    if (out.empty()) fail(cur(), "expected PROGRAM, FUNCTION_BLOCK or FUNCTION");
    return out;
  }

 private:
  [[noreturn]] void fail(const Token& t, const std::string& msg) {
    throw SyntaxError("E_ST_SYNTAX", t.pos, msg + (t.kind == TokKind::End ? " at end of input" : " near '" + t.text + "'"));
  }

  const Token& cur() const { return toks_[p_]; }
  bool at_end() const { return cur().kind == TokKind::End; }
  bool is_kw(std::string_view kw) const { return cur().kind == TokKind::Ident && cur().upper == kw; }
  bool is_op(std::string_view op) const { return cur().kind == TokKind::Op && cur().text == op; }

  const Token& take() { return toks_[p_ < toks_.size() - 1 ? p_++ : p_]; }

  void expect_op(std::string_view op) {
    if (!is_op(op)) fail(cur(), "expected '" + std::string(op) + "'");
    take();
  }
  void expect_kw(std::string_view kw) {
    if (!is_kw(kw)) fail(cur(), "expected " + std::string(kw));
    take();
  }
  void expect_end() {
    if (!at_end()) fail(cur(), "unexpected token");
  }

  const Token& ident() {
    if (cur().kind != TokKind::Ident || is_st_keyword(cur().text)) fail(cur(), "expected identifier");
    return take();
  }

  static void number(std::vector<Stmt>& body, std::size_t& next) {
    for (auto& s : body) {
      s.index = next++;
      if (auto* i = std::get_if<IfStmt>(&s.node)) {
        for (auto& b : i->branches) number(b.body, next);
        number(i->else_body, next);
      }
    }
  }

  Pou unit() {
    Pou pou;
    pou.pos = cur().pos;
    std::string end_kw;
    if (is_kw("PROGRAM")) {
      pou.kind = PouKind::Program;
      end_kw = "END_PROGRAM";
    } else if (is_kw("FUNCTION_BLOCK")) {
      pou.kind = PouKind::FunctionBlock;
      end_kw = "END_FUNCTION_BLOCK";
    } else if (is_kw("FUNCTION")) {
      pou.kind = PouKind::Function;
      end_kw = "END_FUNCTION";
    } else {
      fail(cur(), "expected PROGRAM, FUNCTION_BLOCK or FUNCTION");
    }
    take();
    const Token& name = ident();
    pou.name = name.text;
    pou.upper = name.upper;
    if (pou.kind == PouKind::Function) {
      expect_op(":");
      const Token& rt = take();
      auto t = parse_data_type(rt.text);
      if (rt.kind != TokKind::Ident || !t) fail(rt, "expected elementary return type");
      pou.return_type = *t;
    }
    while (is_kw("VAR_INPUT") || is_kw("VAR_OUTPUT") || is_kw("VAR")) var_block(pou);
    pou.body = stmt_list({end_kw});
    expect_kw(end_kw);
    if (is_op(";")) take();
    std::size_t next = 0;
    number(pou.body, next);
    pou.statement_count = next;
    return pou;
  }

  void var_block(Pou& pou) {
    VarSection section = VarSection::Local;
    if (is_kw("VAR_INPUT")) section = VarSection::Input;
    else if (is_kw("VAR_OUTPUT")) section = VarSection::Output;
    if (section == VarSection::Output && pou.kind == PouKind::Function)
      fail(cur(), "a FUNCTION has a single return value; VAR_OUTPUT is not allowed");
    take();
    while (!is_kw("END_VAR")) {
      VarDecl d;
      d.pos = cur().pos;
      const Token& n = ident();
      d.name = n.text;
      d.upper = n.upper;
      d.section = section;
      expect_op(":");
      const Token& tn = take();
      if (tn.kind != TokKind::Ident) fail(tn, "expected type name");
      d.type_name = tn.text;
      d.type = parse_data_type(tn.text);
      if (is_op(":=")) {
        take();
        if (!d.type) fail(cur(), "function block instances cannot be initialised");
        d.init = init_literal(*d.type);
      }
      expect_op(";");
      if (pou.var_index.count(d.upper) || d.upper == pou.upper)
        throw SyntaxError("E_ST_SYNTAX", d.pos, "duplicate declaration of '" + d.name + "'");
      pou.var_index.emplace(d.upper, pou.vars.size());
      pou.vars.push_back(std::move(d));
    }
    take();
  }

  Value init_literal(DataType type) {
    bool neg = false;
    if (is_op("-")) {
      neg = true;
      take();
    }
    const Token& t = take();
    if (t.kind != TokKind::Literal) fail(t, "expected literal initial value");
    Value v = t.value;
    if (neg) {
      if (auto* i = std::get_if<std::int32_t>(&v)) *i = -*i;
      else if (auto* s = std::get_if<std::int16_t>(&v)) *s = static_cast<std::int16_t>(-*s);
      else if (auto* d = std::get_if<double>(&v)) *d = -*d;
      else if (auto* f = std::get_if<float>(&v)) *f = -*f;
      else fail(t, "cannot negate BOOL");
    }
    // Coerce to declared type.
    const DataType src = type_of(v);
    if (src == type) return v;
    if (type == DataType::Bool || src == DataType::Bool) fail(t, "initial value type mismatch");
    if (is_integer(type)) {
      if (!is_integer(src)) fail(t, "initial value type mismatch");
      const std::int64_t n = src == DataType::Int ? std::get<std::int16_t>(v) : std::get<std::int32_t>(v);
      if (type == DataType::Int) {
        if (n < INT16_MIN || n > INT16_MAX) fail(t, "initial value out of range");
        return static_cast<std::int16_t>(n);
      }
      return static_cast<std::int32_t>(n);
    }
    double d = 0;
    switch (src) {
      case DataType::Int: d = std::get<std::int16_t>(v); break;
      case DataType::Dint: d = std::get<std::int32_t>(v); break;
      case DataType::Real: d = std::get<float>(v); break;
      case DataType::Lreal: d = std::get<double>(v); break;
      default: break;
    }
    if (type == DataType::Real) return static_cast<float>(d);
    return d;
  }

  bool at_terminator(const std::vector<std::string_view>& terms) const {
    if (at_end()) return true;
    for (auto t : terms)
      if (is_kw(t)) return true;
    return false;
  }

  std::vector<Stmt> stmt_list(const std::vector<std::string_view>& terms) {
    std::vector<Stmt> out;
    while (!at_terminator(terms)) {
      if (is_op(";")) {
        take();
        continue;
      }
      out.push_back(statement());
    }
    return out;
  }

  Stmt statement() {
    Stmt s;
    s.pos = cur().pos;
    if (is_kw("IF")) {
      s.node = if_stmt();
      return s;
    }
    if (cur().kind != TokKind::Ident || is_st_keyword(cur().text)) fail(cur(), "expected statement");
    NameExpr name = name_expr();
    if (is_op(":=")) {
      take();
      AssignStmt a;
      a.target = std::move(name);
      a.value = expr();
      expect_op(";");
      s.node = std::move(a);
      return s;
    }
    if (is_op("(")) {
      CallStmt c;
      c.callee = std::move(name);
      c.args = arguments();
      expect_op(";");
      s.node = std::move(c);
      return s;
    }
    fail(cur(), "expected ':=' or '('");
  }

  IfStmt if_stmt() {
    IfStmt out;
    expect_kw("IF");
    for (;;) {
      IfBranch b;
      b.condition = expr();
      expect_kw("THEN");
      b.body = stmt_list({"ELSIF", "ELSE", "END_IF"});
      out.branches.push_back(std::move(b));
      if (is_kw("ELSIF")) {
        take();
        continue;
      }
      break;
    }
    if (is_kw("ELSE")) {
      take();
      out.else_body = stmt_list({"END_IF"});
    }
    expect_kw("END_IF");
    if (is_op(";")) take();
    return out;
  }

  NameExpr name_expr() {
    NameExpr n;
    const Token& first = ident();
    n.parts.push_back(first.text);
    n.upper.push_back(first.upper);
    while (is_op(".")) {
      take();
      const Token& part = ident();
      n.parts.push_back(part.text);
      n.upper.push_back(part.upper);
    }
    return n;
  }

  std::vector<Argument> arguments() {
    expect_op("(");
    std::vector<Argument> args;
    if (is_op(")")) {
      take();
      return args;
    }
    for (;;) {
      Argument a;
      if (cur().kind == TokKind::Ident && toks_[p_ + 1].kind == TokKind::Op && toks_[p_ + 1].text == ":=") {
        const Token& n = ident();
        a.name = n.text;
        a.upper = n.upper;
        take();
      }
      a.value = expr();
      args.push_back(std::move(a));
      if (is_op(",")) {
        take();
        continue;
      }
      break;
    }
    expect_op(")");
    return args;
  }

  ExprPtr make(SourcePos pos, auto node) {
    auto e = std::make_unique<Expr>();
    e->node = std::move(node);
    e->pos = pos;
    return e;
  }

  ExprPtr binary_chain(ExprPtr (Parser::*next)(), std::initializer_list<std::pair<std::string_view, BinaryOp>> ops) {
    ExprPtr lhs = (this->*next)();
    for (;;) {
      std::optional<BinaryOp> op;
      for (auto [text, o] : ops) {
        const bool word = std::isalpha(static_cast<unsigned char>(text.front()));
        if ((word && is_kw(text)) || (!word && is_op(text))) op = o;
      }
      if (!op) return lhs;
      const SourcePos pos = cur().pos;
      take();
      ExprPtr rhs = (this->*next)();
      lhs = make(pos, BinaryExpr{*op, std::move(lhs), std::move(rhs)});
    }
  }

  ExprPtr expr() { return binary_chain(&Parser::xor_expr, {{"OR", BinaryOp::Or}}); }
  ExprPtr xor_expr() { return binary_chain(&Parser::and_expr, {{"XOR", BinaryOp::Xor}}); }
  ExprPtr and_expr() { return binary_chain(&Parser::eq_expr, {{"AND", BinaryOp::And}, {"&", BinaryOp::And}}); }
  ExprPtr eq_expr() { return binary_chain(&Parser::cmp_expr, {{"=", BinaryOp::Eq}, {"<>", BinaryOp::Ne}}); }
  ExprPtr cmp_expr() {
    return binary_chain(&Parser::add_expr, {{"<", BinaryOp::Lt}, {"<=", BinaryOp::Le}, {">", BinaryOp::Gt},
                                            {">=", BinaryOp::Ge}});
  }
  ExprPtr add_expr() { return binary_chain(&Parser::mul_expr, {{"+", BinaryOp::Add}, {"-", BinaryOp::Sub}}); }
  ExprPtr mul_expr() {
    return binary_chain(&Parser::unary_expr, {{"*", BinaryOp::Mul}, {"/", BinaryOp::Div}, {"MOD", BinaryOp::Mod}});
  }

  ExprPtr unary_expr() {
    const SourcePos pos = cur().pos;
    if (is_op("-")) {
      take();
      return make(pos, UnaryExpr{UnaryOp::Neg, unary_expr()});
    }
    if (is_op("+")) {
      take();
      return unary_expr();
    }
    if (is_kw("NOT")) {
      take();
      return make(pos, UnaryExpr{UnaryOp::Not, unary_expr()});
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = cur();
    const SourcePos pos = t.pos;
    if (is_op("**")) fail(t, "exponentiation is not supported");
    if (t.kind == TokKind::Literal) {
      take();
      return make(pos, LiteralExpr{t.value, t.untyped});
    }
    if (is_op("(")) {
      take();
      ExprPtr e = expr();
      expect_op(")");
      return e;
    }
    if (t.kind == TokKind::Ident && !is_st_keyword(t.text)) {
      if (toks_[p_ + 1].kind == TokKind::Op && toks_[p_ + 1].text == "(") {
        const Token& callee = take();
        CallExpr c;
        c.callee = callee.text;
        c.upper = callee.upper;
        c.args = arguments();
        return make(pos, std::move(c));
      }
      return make(pos, name_expr());
    }
    fail(t, "expected expression");
  }

  std::vector<Token> toks_;
  std::size_t p_ = 0;
};

}  // namespace

StatementList parse_st(std::string_view text) { return Parser(Lexer(text, true).run()).statements(); }

std::vector<Pou> parse_units(std::string_view text) { return Parser(Lexer(text, true).run()).units(); }

bool contains_loop_token(std::string_view text) {
  for (const auto& t : Lexer(text, false).run())
    if (t.kind == TokKind::Ident && is_loop_keyword(t.upper)) return true;
  return false;
}

std::string rename_identifier(std::string_view text, std::string_view from, std::string_view to) {
  const auto toks = Lexer(text, false).run();
  const std::string target = to_upper(from);
  std::string out;
  std::size_t copied = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto& t = toks[i];
    if (t.kind != TokKind::Ident || t.upper != target) continue;
    if (i > 0 && toks[i - 1].kind == TokKind::Op && toks[i - 1].text == ".") continue;
    out.append(text.substr(copied, t.offset - copied));
    out.append(to);
    copied = t.offset + t.length;
  }
  out.append(text.substr(copied));
  return out;
}

}  // namespace maspc::st
