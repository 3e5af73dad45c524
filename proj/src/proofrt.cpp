// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include "cstar/proofrt.hpp"

#include <cctype>
#include <cstring>

#include "cstar/arith.hpp"

namespace cstar::proofrt {

std::string PValue::kind_name() const {
  switch (k) {
    case K::Null: return "NULL";
    case K::Unit: return "void";
    case K::Int: return "int";
    case K::Str: return "string";
    case K::TermV: return "term";
    case K::ThmV: return "thm";
    case K::Array: return "array";
    case K::Closure: return "function";
    case K::Builtin: return "builtin";
  }
  return "?";
}

PValue* PEnv::find(const std::string& name) {
  for (PEnv* e = this; e; e = e->parent.get()) {
    auto it = e->vars.find(name);
    if (it != e->vars.end()) return &it->second;
  }
  return nullptr;
}

void PEnv::declare(const std::string& name, PValue v) { vars[name] = std::move(v); }

// ---------------------------------------------------------------------------
// Proof-language AST
// ---------------------------------------------------------------------------

struct PExpr;
using PExprPtr = std::shared_ptr<PExpr>;

struct PExpr {
  enum class K {
    IntLit, StrLit, QuoteLit, Null, Var, Call, Index, Unary, Binary, ArrayLit
  } k;
  long long i = 0;
  std::string s;  // StrLit/QuoteLit text, Var/Call name, operator spelling
  std::vector<PExprPtr> args;
  PExprPtr a, b;
  cfront::Span span;
};

struct PStmt;
using PStmtPtr = std::shared_ptr<PStmt>;

struct PStmt {
  enum class K { Decl, Assign, If, While, Return, ExprStmt, Block } k;
  std::string type_name;
  std::string name;
  bool is_array = false;
  PExprPtr expr;
  std::vector<PStmtPtr> body, else_body;
  cfront::Span span;
};

struct PFunc {
  std::string name;
  std::string ret_type;
  std::vector<std::pair<std::string, std::string>> params;  // (type, name)
  std::vector<PStmtPtr> body;
  cfront::Span span;
};

// ---------------------------------------------------------------------------
// Lexer and parser
// ---------------------------------------------------------------------------

namespace {

struct PTok {
  enum class K { End, Ident, Int, Str, Quote, Punct } k;
  std::string text;
  long long i = 0;
  int line = 0, col = 0;
};

struct PLexer {
  const std::string& src;
  cfront::Span base;
  std::vector<PTok> toks;
  size_t i = 0;
  int line, col;

  PLexer(const std::string& s, const cfront::Span& sp) : src(s), base(sp) {
    line = sp.line;
    col = sp.col;
    run();
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError("proof code: " + msg + " (" + base.file + ")", line, col);
  }

  void advance() {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  }

  bool at(const char* s) const { return src.compare(i, strlen(s), s) == 0; }

  void run() {
    while (i < src.size()) {
      char c = src[i];
      if (isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (at("//")) {
        while (i < src.size() && src[i] != '\n') advance();
        continue;
      }
      if (at("/*")) {
        while (i < src.size() && !at("*/")) advance();
        if (i >= src.size()) fail("unterminated comment");
        advance();
        advance();
        continue;
      }
      int tline = line, tcol = col;
      if (c == '`') {
        advance();
        std::string body;
        while (i < src.size() && src[i] != '`') {
          body.push_back(src[i]);
          advance();
        }
        if (i >= src.size()) fail("unterminated quotation");
        advance();
        toks.push_back({PTok::K::Quote, body, 0, tline, tcol});
        continue;
      }
      if (c == '"') {
        advance();
        std::string body;
        while (i < src.size() && src[i] != '"') {
          if (src[i] == '\\' && i + 1 < src.size()) advance();
          body.push_back(src[i]);
          advance();
        }
        if (i >= src.size()) fail("unterminated string");
        advance();
        toks.push_back({PTok::K::Str, body, 0, tline, tcol});
        continue;
      }
      if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string word;
        while (i < src.size() &&
               (isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
          word.push_back(src[i]);
          advance();
        }
        toks.push_back({PTok::K::Ident, word, 0, tline, tcol});
        continue;
      }
      if (isdigit(static_cast<unsigned char>(c))) {
        std::string num;
        while (i < src.size() && isdigit(static_cast<unsigned char>(src[i]))) {
          num.push_back(src[i]);
          advance();
        }
        toks.push_back({PTok::K::Int, num, std::stoll(num), tline, tcol});
        continue;
      }
      static const char* multi[] = {"==", "!=", "<=", ">=", "&&", "||"};
      bool matched = false;
      for (const char* m : multi) {
        if (at(m)) {
          toks.push_back({PTok::K::Punct, m, 0, tline, tcol});
          advance();
          advance();
          matched = true;
          break;
        }
      }
      if (matched) continue;
      if (strchr("(){}[];,=+-*/%<>!", c)) {
        toks.push_back({PTok::K::Punct, std::string(1, c), 0, tline, tcol});
        advance();
        continue;
      }
      fail(std::string("unexpected character '") + c + "'");
    }
    toks.push_back({PTok::K::End, "", 0, line, col});
  }
};

const std::set<std::string> kPTypes = {"void", "int", "term", "thm", "string"};

struct BlockItem {
  std::shared_ptr<PFunc> func;
  PStmtPtr stmt;
};

struct PParser {
  PLexer lex;
  size_t p = 0;
  std::string file;

  PParser(const std::string& src, const cfront::Span& span) : lex(src, span), file(span.file) {}

  const PTok& peek(size_t ahead = 0) const {
    return lex.toks[std::min(p + ahead, lex.toks.size() - 1)];
  }
  PTok next() { return lex.toks[std::min(p++, lex.toks.size() - 1)]; }
  [[noreturn]] void fail(const std::string& msg) {
    const PTok& t = peek();
    throw ParseError("proof code: " + msg + " near '" + t.text + "' (" + file + ")", t.line,
                     t.col);
  }
  bool accept(const char* punct) {
    if (peek().k == PTok::K::Punct && peek().text == punct) {
      ++p;
      return true;
    }
    return false;
  }
  void expect(const char* punct) {
    if (!accept(punct)) fail(std::string("expected '") + punct + "'");
  }
  bool accept_ident(const char* word) {
    if (peek().k == PTok::K::Ident && peek().text == word) {
      ++p;
      return true;
    }
    return false;
  }
  cfront::Span span_here() const { return {file, peek().line, peek().col}; }

  PExprPtr mk(PExpr e) { return std::make_shared<PExpr>(std::move(e)); }

  PExprPtr parse_primary() {
    const PTok& t = peek();
    cfront::Span sp = span_here();
    if (t.k == PTok::K::Int) {
      ++p;
      PExpr e;
      e.k = PExpr::K::IntLit;
      e.i = t.i;
      e.span = sp;
      return mk(std::move(e));
    }
    if (t.k == PTok::K::Str) {
      ++p;
      PExpr e;
      e.k = PExpr::K::StrLit;
      e.s = t.text;
      e.span = sp;
      return mk(std::move(e));
    }
    if (t.k == PTok::K::Quote) {
      ++p;
      PExpr e;
      e.k = PExpr::K::QuoteLit;
      e.s = t.text;
      e.span = sp;
      return mk(std::move(e));
    }
    if (t.k == PTok::K::Ident) {
      if (t.text == "NULL") {
        ++p;
        PExpr e;
        e.k = PExpr::K::Null;
        e.span = sp;
        return mk(std::move(e));
      }
      std::string name = next().text;
      if (accept("(")) {
        PExpr e;
        e.k = PExpr::K::Call;
        e.s = name;
        e.span = sp;
        if (!accept(")")) {
          e.args.push_back(parse_expr());
          while (accept(",")) e.args.push_back(parse_expr());
          expect(")");
        }
        return mk(std::move(e));
      }
      PExpr e;
      e.k = PExpr::K::Var;
      e.s = name;
      e.span = sp;
      return mk(std::move(e));
    }
    if (accept("(")) {
      PExprPtr inner = parse_expr();
      expect(")");
      return inner;
    }
    if (accept("{")) {
      PExpr e;
      e.k = PExpr::K::ArrayLit;
      e.span = sp;
      if (!accept("}")) {
        e.args.push_back(parse_expr());
        while (accept(",")) e.args.push_back(parse_expr());
        expect("}");
      }
      return mk(std::move(e));
    }
    fail("expected an expression");
  }

  PExprPtr parse_postfix() {
    PExprPtr e = parse_primary();
    while (accept("[")) {
      PExprPtr idx = parse_expr();
      expect("]");
      PExpr out;
      out.k = PExpr::K::Index;
      out.a = e;
      out.b = idx;
      out.span = e->span;
      e = mk(std::move(out));
    }
    return e;
  }

  PExprPtr parse_unary() {
    cfront::Span sp = span_here();
    if (accept("-") || accept("!")) {
      std::string op = lex.toks[p - 1].text;
      PExpr e;
      e.k = PExpr::K::Unary;
      e.s = op;
      e.a = parse_unary();
      e.span = sp;
      return mk(std::move(e));
    }
    return parse_postfix();
  }

  static int level_of(const std::string& op) {
    if (op == "*" || op == "/" || op == "%") return 5;
    if (op == "+" || op == "-") return 4;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 3;
    if (op == "==" || op == "!=") return 2;
    if (op == "&&") return 1;
    if (op == "||") return 0;
    return -1;
  }

  PExprPtr parse_binary(int min_level) {
    PExprPtr lhs = parse_unary();
    for (;;) {
      if (peek().k != PTok::K::Punct) break;
      int lvl = level_of(peek().text);
      if (lvl < min_level) break;
      std::string op = next().text;
      PExprPtr rhs = parse_binary(lvl + 1);
      PExpr e;
      e.k = PExpr::K::Binary;
      e.s = op;
      e.a = lhs;
      e.b = rhs;
      e.span = lhs->span;
      lhs = mk(std::move(e));
    }
    return lhs;
  }

  PExprPtr parse_expr() { return parse_binary(0); }

  PStmtPtr mks(PStmt s) { return std::make_shared<PStmt>(std::move(s)); }

  bool type_here() const { return peek().k == PTok::K::Ident && kPTypes.count(peek().text); }

  PStmtPtr parse_stmt() {
    cfront::Span sp = span_here();
    if (accept_ident("if")) {
      PStmt s;
      s.k = PStmt::K::If;
      s.span = sp;
      expect("(");
      s.expr = parse_expr();
      expect(")");
      s.body = parse_block_or_single();
      if (accept_ident("else")) s.else_body = parse_block_or_single();
      return mks(std::move(s));
    }
    if (accept_ident("while")) {
      PStmt s;
      s.k = PStmt::K::While;
      s.span = sp;
      expect("(");
      s.expr = parse_expr();
      expect(")");
      s.body = parse_block_or_single();
      return mks(std::move(s));
    }
    if (accept_ident("return")) {
      PStmt s;
      s.k = PStmt::K::Return;
      s.span = sp;
      if (!accept(";")) {
        s.expr = parse_expr();
        expect(";");
      }
      return mks(std::move(s));
    }
    if (peek().k == PTok::K::Punct && peek().text == "{") {
      PStmt s;
      s.k = PStmt::K::Block;
      s.span = sp;
      s.body = parse_block_or_single();
      return mks(std::move(s));
    }
    if (type_here()) {
      PStmt s;
      s.k = PStmt::K::Decl;
      s.span = sp;
      s.type_name = next().text;
      if (peek().k != PTok::K::Ident) fail("expected a name");
      s.name = next().text;
      if (accept("[")) {
        expect("]");
        s.is_array = true;
      }
      if (accept("=")) s.expr = parse_expr();
      expect(";");
      return mks(std::move(s));
    }
    if (peek().k == PTok::K::Ident && peek(1).k == PTok::K::Punct && peek(1).text == "=") {
      PStmt s;
      s.k = PStmt::K::Assign;
      s.span = sp;
      s.name = next().text;
      ++p;  // '='
      s.expr = parse_expr();
      expect(";");
      return mks(std::move(s));
    }
    PStmt s;
    s.k = PStmt::K::ExprStmt;
    s.span = sp;
    s.expr = parse_expr();
    expect(";");
    return mks(std::move(s));
  }

  std::vector<PStmtPtr> parse_block_or_single() {
    if (accept("{")) {
      std::vector<PStmtPtr> out;
      while (!accept("}")) {
        if (peek().k == PTok::K::End) fail("unterminated block");
        out.push_back(parse_stmt());
      }
      return out;
    }
    return {parse_stmt()};
  }

  std::vector<BlockItem> parse_block_items() {
    std::vector<BlockItem> out;
    while (peek().k != PTok::K::End) {
      if (accept_ident("extern")) {
        while (peek().k != PTok::K::End && !accept(";")) ++p;
        continue;
      }
      if (type_here() && peek(1).k == PTok::K::Ident && peek(2).k == PTok::K::Punct &&
          peek(2).text == "(" && is_function_definition()) {
        auto f = std::make_shared<PFunc>();
        f->span = span_here();
        f->ret_type = next().text;
        f->name = next().text;
        expect("(");
        if (!accept(")")) {
          if (peek().k == PTok::K::Ident && peek().text == "void" &&
              peek(1).k == PTok::K::Punct && peek(1).text == ")") {
            p += 2;
          } else {
            for (;;) {
              if (!type_here()) fail("expected parameter type");
              std::string ty = next().text;
              if (peek().k != PTok::K::Ident) fail("expected parameter name");
              std::string pname = next().text;
              f->params.emplace_back(ty, pname);
              if (accept(")")) break;
              expect(",");
            }
          }
        }
        expect("{");
        while (!accept("}")) {
          if (peek().k == PTok::K::End) fail("unterminated function body");
          f->body.push_back(parse_stmt());
        }
        out.push_back({f, nullptr});
        continue;
      }
      out.push_back({nullptr, parse_stmt()});
    }
    return out;
  }

  // distinguish `thm f(...) {` (definition) from `thm x = ...;`
  bool is_function_definition() const {
    // scan past the balanced parens after ident for a '{'
    size_t q = p + 2;  // at '('
    int depth = 0;
    while (q < lex.toks.size()) {
      const PTok& t = lex.toks[q];
      if (t.k == PTok::K::Punct && t.text == "(") ++depth;
      if (t.k == PTok::K::Punct && t.text == ")") {
        --depth;
        if (depth == 0) {
          return q + 1 < lex.toks.size() && lex.toks[q + 1].k == PTok::K::Punct &&
                 lex.toks[q + 1].text == "{";
        }
      }
      if (t.k == PTok::K::End) break;
      ++q;
    }
    return false;
  }
};

struct ReturnSignal {
  PValue value;
};

std::string trim_copy(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Evaluation (friend of Interp)
// ---------------------------------------------------------------------------

struct EvalVisitor {
  Interp& in;

  PValue eval(const PExprPtr& e) {
    switch (e->k) {
      case PExpr::K::IntLit:
        return PValue::of_int(e->i);
      case PExpr::K::StrLit: {
        PValue v;
        v.k = PValue::K::Str;
        v.s = e->s;
        return v;
      }
      case PExpr::K::QuoteLit:
        return PValue::of_term(in.quote_term(e->s, e->span, false));
      case PExpr::K::Null:
        return PValue::null();
      case PExpr::K::Var: {
        if (PValue* v = in.cur_scope_->find(e->s)) return *v;
        throw VerifyError("proof code: unbound identifier " + e->s + " at " + e->span.file +
                          ":" + std::to_string(e->span.line));
      }
      case PExpr::K::ArrayLit: {
        PValue v;
        v.k = PValue::K::Array;
        v.arr = std::make_shared<std::vector<PValue>>();
        for (const auto& a : e->args) v.arr->push_back(eval(a));
        return v;
      }
      case PExpr::K::Index: {
        PValue a = eval(e->a);
        PValue i = eval(e->b);
        if (a.k != PValue::K::Array || i.k != PValue::K::Int)
          throw VerifyError("proof code: bad indexing at " + e->span.file + ":" +
                            std::to_string(e->span.line));
        if (i.i < 0 || static_cast<size_t>(i.i) >= a.arr->size())
          throw VerifyError("proof code: index out of range");
        return (*a.arr)[i.i];
      }
      case PExpr::K::Unary: {
        PValue a = eval(e->a);
        if (a.k != PValue::K::Int)
          throw VerifyError("proof code: unary " + e->s + " on " + a.kind_name());
        return PValue::of_int(e->s == "-" ? -a.i : (a.i == 0 ? 1 : 0));
      }
      case PExpr::K::Binary:
        return eval_binary(e);
      case PExpr::K::Call: {
        // `define` consumes its quotation argument as raw text
        if (e->s == "define") {
          if (e->args.size() != 1 || e->args[0]->k != PExpr::K::QuoteLit)
            throw VerifyError("define: expected a single quotation argument");
          return in.define_predicate(e->args[0]->s, e->span);
        }
        if (PValue* fv = in.cur_scope_->find(e->s)) {
          if (fv->k == PValue::K::Closure) {
            PValue fn = *fv;  // copy: the environment may rebind during evaluation
            std::vector<PValue> args;
            for (const auto& a : e->args) args.push_back(eval(a));
            return call_closure(fn, args, e->span);
          }
        }
        std::vector<PValue> args;
        for (const auto& a : e->args) args.push_back(eval(a));
        return in.call_builtin(e->s, args, e->span);
      }
    }
    throw VerifyError("proof code: unhandled expression");
  }

  PValue eval_binary(const PExprPtr& e) {
    const std::string& op = e->s;
    PValue a = eval(e->a);
    if (op == "==" || op == "!=") {
      PValue b = eval(e->b);
      bool eqv;
      if (a.k == PValue::K::Null || b.k == PValue::K::Null)
        eqv = a.k == b.k;
      else if (a.k == PValue::K::Int && b.k == PValue::K::Int)
        eqv = a.i == b.i;
      else
        throw VerifyError(
            "proof code: == compares ints and NULL; use equals_term for terms");
      return PValue::of_int((op == "==") == eqv ? 1 : 0);
    }
    if (op == "&&" || op == "||") {
      if (a.k != PValue::K::Int)
        throw VerifyError("proof code: " + op + " on " + a.kind_name());
      if (op == "&&" && a.i == 0) return PValue::of_int(0);
      if (op == "||" && a.i != 0) return PValue::of_int(1);
      PValue b = eval(e->b);
      if (b.k != PValue::K::Int)
        throw VerifyError("proof code: " + op + " on " + b.kind_name());
      return PValue::of_int(b.i != 0 ? 1 : 0);
    }
    PValue b = eval(e->b);
    if (a.k != PValue::K::Int || b.k != PValue::K::Int)
      throw VerifyError("proof code: arithmetic on " + a.kind_name() + " and " +
                        b.kind_name());
    long long x = a.i, y = b.i;
    if (op == "+") return PValue::of_int(x + y);
    if (op == "-") return PValue::of_int(x - y);
    if (op == "*") return PValue::of_int(x * y);
    if (op == "/" || op == "%") {
      if (y == 0) throw VerifyError("proof code: division by zero");
      return PValue::of_int(op == "/" ? x / y : x % y);
    }
    if (op == "<") return PValue::of_int(x < y);
    if (op == "<=") return PValue::of_int(x <= y);
    if (op == ">") return PValue::of_int(x > y);
    if (op == ">=") return PValue::of_int(x >= y);
    throw VerifyError("proof code: unknown operator " + op);
  }

  PValue call_closure(const PValue& fn, std::vector<PValue>& args, const cfront::Span& span) {
    const PFunc& f = *fn.fn;
    if (args.size() != f.params.size())
      throw VerifyError("proof code: call to " + f.name + " with " +
                        std::to_string(args.size()) + " arguments, expected " +
                        std::to_string(f.params.size()) + " at " + span.file + ":" +
                        std::to_string(span.line));
    auto scope = std::make_shared<PEnv>();
    scope->parent = fn.closure;
    for (size_t i = 0; i < args.size(); ++i) scope->declare(f.params[i].second, args[i]);
    auto saved = in.cur_scope_;
    in.cur_scope_ = scope;
    PValue result = PValue::unit();
    try {
      for (const auto& s : f.body) exec(s);
    } catch (ReturnSignal& r) {
      result = std::move(r.value);
      in.cur_scope_ = saved;
      return result;
    } catch (...) {
      in.cur_scope_ = saved;
      throw;
    }
    in.cur_scope_ = saved;
    return result;
  }

  void exec_scoped(const std::vector<PStmtPtr>& body) {
    auto scope = std::make_shared<PEnv>();
    scope->parent = in.cur_scope_;
    auto saved = in.cur_scope_;
    in.cur_scope_ = scope;
    try {
      for (const auto& st : body) exec(st);
    } catch (...) {
      in.cur_scope_ = saved;
      throw;
    }
    in.cur_scope_ = saved;
  }

  void exec(const PStmtPtr& s) {
    switch (s->k) {
      case PStmt::K::Decl: {
        PValue v = s->expr ? eval(s->expr) : PValue::null();
        in.cur_scope_->declare(s->name, std::move(v));
        return;
      }
      case PStmt::K::Assign: {
        PValue* slot = in.cur_scope_->find(s->name);
        if (!slot)
          throw VerifyError("proof code: assignment to unbound " + s->name + " at " +
                            s->span.file + ":" + std::to_string(s->span.line));
        *slot = eval(s->expr);
        return;
      }
      case PStmt::K::If: {
        PValue c = eval(s->expr);
        if (c.k != PValue::K::Int)
          throw VerifyError("proof code: if condition must be an int");
        exec_scoped(c.i != 0 ? s->body : s->else_body);
        return;
      }
      case PStmt::K::While: {
        int guard = 0;
        for (;;) {
          PValue c = eval(s->expr);
          if (c.k != PValue::K::Int)
            throw VerifyError("proof code: while condition must be an int");
          if (c.i == 0) break;
          exec_scoped(s->body);
          if (++guard > 1000000)
            throw VerifyError("proof code: loop budget exceeded at " + s->span.file + ":" +
                              std::to_string(s->span.line));
        }
        return;
      }
      case PStmt::K::Return: {
        ReturnSignal r;
        r.value = s->expr ? eval(s->expr) : PValue::unit();
        throw r;
      }
      case PStmt::K::ExprStmt:
        eval(s->expr);
        return;
      case PStmt::K::Block:
        exec_scoped(s->body);
        return;
    }
  }
};

// ---------------------------------------------------------------------------
// Interp
// ---------------------------------------------------------------------------

Interp::Interp(engine::RunContext& ctx) : ctx_(ctx), th_(*ctx.theory) {
  file_scope_ = std::make_shared<PEnv>();
  cur_scope_ = file_scope_;
  ctx_.eval_payload = [this](const std::string& payload, const quote::SyntaxEnv& base,
                             bool hprop) {
    return eval_attribute_payload(payload, base, hprop);
  };
}

quote::SyntaxEnv Interp::quote_env() const {
  quote::SyntaxEnv env;
  if (engine_) env = engine_->proof_quote_env();
  env.allow_free_vars = residual_mode_;
  std::shared_ptr<PEnv> scope = cur_scope_;
  env.antiquote = [scope](const std::string& name, const HolType& ty) -> Term {
    for (PEnv* e = scope.get(); e; e = e->parent.get()) {
      auto it = e->vars.find(name);
      if (it != e->vars.end()) {
        if (it->second.k != PValue::K::TermV)
          throw QuoteError("anti-quotation ${" + name + "} is bound to a " +
                           it->second.kind_name() + ", not a term");
        return it->second.term;
      }
    }
    throw QuoteError("anti-quotation ${" + name + ":" + ty.to_string() +
                     "} is unbound in proof scope");
  };
  return env;
}

Term Interp::quote_term(const std::string& text, const cfront::Span& span, bool hprop) {
  quote::SyntaxEnv env = quote_env();
  try {
    return hprop ? quote::parse_hprop(th_.kernel(), text, env)
                 : quote::parse_term(th_.kernel(), text, env);
  } catch (const QuoteError& e) {
    throw QuoteError(std::string(e.what()) + " at " + span.file + ":" +
                     std::to_string(span.line));
  }
}

Term Interp::eval_attribute_payload(const std::string& payload, const quote::SyntaxEnv& base,
                                    bool hprop) {
  std::string text = trim_copy(payload);
  if (!text.empty() && text.front() == '`') {
    size_t close = text.rfind('`');
    std::string inner = text.substr(1, close - 1);
    quote::SyntaxEnv env = base;
    env.antiquote = quote_env().antiquote;
    env.allow_free_vars = residual_mode_;
    return hprop ? quote::parse_hprop(th_.kernel(), inner, env)
                 : quote::parse_term(th_.kernel(), inner, env);
  }
  PParser parser(text, {"<attribute>", 1, 1});
  PExprPtr e = parser.parse_expr();
  EvalVisitor v{*this};
  PValue val = v.eval(e);
  if (val.k != PValue::K::TermV)
    throw VerifyError("attribute payload did not evaluate to a term (got " + val.kind_name() +
                      ")");
  if (hprop && !(val.term.type() == hprop_ty()))
    throw VerifyError("attribute payload has type " + val.term.type().to_string() +
                      ", expected hprop");
  return val.term;
}

// `name(p1:ty1, ...):resty = body` -- registers a user predicate.
PValue Interp::define_predicate(const std::string& equation, const cfront::Span& span) {
  const Kernel& k = th_.kernel();
  size_t open = equation.find('(');
  size_t close = equation.find(')');
  size_t colon = equation.find(':', close == std::string::npos ? 0 : close);
  size_t eq = equation.find('=', colon == std::string::npos ? 0 : colon);
  if (open == std::string::npos || close == std::string::npos || colon == std::string::npos ||
      eq == std::string::npos || !(open < close && close < colon && colon < eq))
    throw VerifyError(
        "define: expected `name(p1:ty1, ...):resty = body` at " + span.file + ":" +
        std::to_string(span.line));
  std::string name = trim_copy(equation.substr(0, open));
  std::string params_text = equation.substr(open + 1, close - open - 1);
  std::string resty_text = trim_copy(equation.substr(colon + 1, eq - colon - 1));
  std::string body_text = equation.substr(eq + 1);

  std::vector<Term> params;
  quote::SyntaxEnv env = quote_env();
  std::string cur;
  auto flush = [&]() {
    std::string part = trim_copy(cur);
    cur.clear();
    if (part.empty()) return;
    auto [pname, pty] = quote::parse_typed_name(k, part);
    Term v = mk_var(pname, pty);
    params.push_back(v);
    env.vars[pname] = v;
  };
  for (char c : params_text) {
    if (c == ',')
      flush();
    else
      cur.push_back(c);
  }
  flush();

  HolType resty = quote::parse_type(k, resty_text);
  HolType cty = resty;
  for (size_t i = params.size(); i-- > 0;) cty = fun_ty(params[i].type(), cty);
  env.vars[name] = mk_var(name, cty);
  Term body = quote::parse_term(k, body_text, env);
  if (!(body.type() == resty))
    throw VerifyError("define: body has type " + body.type().to_string() + ", declared " +
                      resty.to_string());
  Theorem def = th_.define_predicate(name, params, body);
  return PValue::of_thm(def);
}

// ---------------------------------------------------------------------------
// Builtins
// ---------------------------------------------------------------------------

namespace {

Term want_term(const std::vector<PValue>& args, size_t i, const std::string& name) {
  if (i >= args.size() || args[i].k != PValue::K::TermV)
    throw VerifyError("builtin " + name + ": argument " + std::to_string(i + 1) +
                      " must be a term");
  return args[i].term;
}

Theorem want_thm(const std::vector<PValue>& args, size_t i, const std::string& name) {
  if (i >= args.size() || args[i].k != PValue::K::ThmV)
    throw VerifyError("builtin " + name + ": argument " + std::to_string(i + 1) +
                      " must be a theorem" +
                      (i < args.size() && args[i].k == PValue::K::Null ? " (got NULL)" : ""));
  return args[i].thm;
}

void want_arity(const std::vector<PValue>& args, size_t n, const std::string& name) {
  if (args.size() != n)
    throw VerifyError("builtin " + name + ": expected " + std::to_string(n) +
                      " arguments, got " + std::to_string(args.size()));
}

}  // namespace

PValue Interp::call_builtin(const std::string& name, std::vector<PValue>& args,
                            const cfront::Span& span) {
  const Kernel& k = th_.kernel();
  auto wrap = [&](auto fn) -> PValue {
    try {
      return fn();
    } catch (const VerifyError&) {
      throw;
    } catch (const Error& e) {
      throw VerifyError(std::string(e.what()) + " [in " + name + " at " + span.file + ":" +
                        std::to_string(span.line) + "]");
    }
  };

  if (name == "refl") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(k.refl(want_term(args, 0, name))); });
  if (name == "symm") return wrap([&] { want_arity(args, 1, name);
    Theorem th = want_thm(args, 0, name);
    std::vector<Term> binders;
    rules::strip_forall(th.conclusion(), binders);
    if (!binders.empty()) {
      th = rules::specialize(k, th, binders);
      th = k.symm(th);
      for (size_t i = binders.size(); i-- > 0;) th = rules::gen(k, binders[i], th);
      return PValue::of_thm(th);
    }
    return PValue::of_thm(k.symm(th)); });
  if (name == "trans") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(k.trans(want_thm(args, 0, name), want_thm(args, 1, name))); });
  if (name == "assume") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(k.assume(want_term(args, 0, name))); });
  if (name == "eq_mp") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(k.eq_mp(want_thm(args, 0, name), want_thm(args, 1, name))); });
  if (name == "beta") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(k.beta(want_term(args, 0, name))); });
  if (name == "mk_app") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_term(mk_app(want_term(args, 0, name), want_term(args, 1, name))); });
  if (name == "mp") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(rules::mp(k, want_thm(args, 0, name), want_thm(args, 1, name))); });
  if (name == "disch") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(rules::disch(k, want_term(args, 0, name), want_thm(args, 1, name))); });
  if (name == "conj") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(rules::conj(k, want_thm(args, 0, name), want_thm(args, 1, name))); });
  if (name == "conjunct1") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(rules::conjunct1(k, want_thm(args, 0, name))); });
  if (name == "conjunct2") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(rules::conjunct2(k, want_thm(args, 0, name))); });
  if (name == "specialize") return wrap([&] {
    if (args.empty()) throw VerifyError("specialize needs a theorem");
    Theorem th = want_thm(args, 0, name);
    std::vector<Term> ts;
    for (size_t i = 1; i < args.size(); ++i) ts.push_back(want_term(args, i, name));
    return PValue::of_thm(rules::specialize(k, th, ts)); });
  if (name == "generalize") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(rules::gen(k, want_term(args, 0, name), want_thm(args, 1, name))); });
  if (name == "gen_all") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(rules::gen_all(k, want_thm(args, 0, name))); });
  if (name == "conclusion") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_term(want_thm(args, 0, name).conclusion()); });
  if (name == "consequent") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_term(consequent(want_term(args, 0, name))); });
  if (name == "antecedent") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_term(antecedent(want_term(args, 0, name))); });
  if (name == "is_app") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_int(want_term(args, 0, name).is_app() ? 1 : 0); });
  if (name == "app_fn") return wrap([&] { want_arity(args, 1, name);
    Term t = want_term(args, 0, name);
    if (!t.is_app()) throw VerifyError("app_fn: not an application");
    return PValue::of_term(t.fn()); });
  if (name == "app_arg") return wrap([&] { want_arity(args, 1, name);
    Term t = want_term(args, 0, name);
    if (!t.is_app()) throw VerifyError("app_arg: not an application");
    return PValue::of_term(t.arg()); });
  if (name == "fact_emp") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(sep::fact_emp_thm(th_, want_thm(args, 0, name))); });
  if (name == "fact_intro") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(sep::fact_intro_thm(th_, want_term(args, 0, name), want_thm(args, 1, name))); });
  if (name == "open_forall") return wrap([&] { want_arity(args, 1, name);
    std::vector<Term> binders;
    return PValue::of_term(rules::strip_forall(want_term(args, 0, name), binders)); });
  if (name == "equals_term") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_int(alpha_eq(want_term(args, 0, name), want_term(args, 1, name)) ? 1 : 0); });
  if (name == "is_sep") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_int(th_.is_sep(want_term(args, 0, name)) ? 1 : 0); });
  if (name == "left_of_sep") return wrap([&] { want_arity(args, 1, name);
    Term t = want_term(args, 0, name);
    if (!th_.is_sep(t)) throw VerifyError("left_of_sep: not a separating conjunction");
    return PValue::of_term(binary_lhs(t)); });
  if (name == "right_of_sep") return wrap([&] { want_arity(args, 1, name);
    Term t = want_term(args, 0, name);
    if (!th_.is_sep(t)) throw VerifyError("right_of_sep: not a separating conjunction");
    return PValue::of_term(binary_rhs(t)); });
  if (name == "print_term") return wrap([&] { want_arity(args, 1, name);
    PValue v; v.k = PValue::K::Str; v.s = quote::print_term(want_term(args, 0, name));
    return v; });

  if (name == "arith_rule") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(arith::arith_rule(k, want_term(args, 0, name))); });

  if (name == "rewrite") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(sep::rewrite_once(k, want_thm(args, 0, name), want_term(args, 1, name))); });
  if (name == "rewrite_rule_list") return wrap([&] { want_arity(args, 2, name);
    if (args[0].k != PValue::K::Array)
      throw VerifyError("rewrite_rule_list: first argument must be a NULL-terminated array");
    std::vector<Theorem> eqs;
    for (const auto& v : *args[0].arr) {
      if (v.k == PValue::K::Null) break;
      if (v.k != PValue::K::ThmV)
        throw VerifyError("rewrite_rule_list: array elements must be theorems");
      eqs.push_back(v.thm);
    }
    return PValue::of_thm(sep::rewrite_rule_list(k, eqs, want_thm(args, 1, name))); });
  if (name == "hsep_comm") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(sep::hsep_comm_thm(th_, want_term(args, 0, name))); });
  if (name == "hsep_move") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(sep::hsep_move_thm(th_, want_term(args, 0, name))); });
  if (name == "sep_normalize") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(sep::sep_normalize_thm(th_, want_term(args, 0, name))); });
  if (name == "sep_lift") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(sep::sep_lift_thm(th_, want_term(args, 0, name), want_term(args, 1, name))); });
  if (name == "sep_lift_one") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(sep::sep_lift_one_thm(th_, want_term(args, 0, name), want_term(args, 1, name))); });
  if (name == "sep_reorder") return wrap([&] { want_arity(args, 2, name);
    auto r = sep::sep_reorder_thm(th_, want_term(args, 0, name), want_term(args, 1, name));
    return r ? PValue::of_thm(*r) : PValue::null(); });
  if (name == "local_apply") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(sep::local_apply_thm(th_, want_term(args, 0, name), want_thm(args, 1, name))); });
  if (name == "exists_intro") return wrap([&] {
    if (args.empty()) throw VerifyError("exists_intro needs a target");
    Term target = want_term(args, 0, name);
    std::vector<Term> wits;
    for (size_t i = 1; i < args.size(); ++i) wits.push_back(want_term(args, i, name));
    return PValue::of_thm(sep::exists_intro_thm(th_, wits, target)); });
  if (name == "arith_subst") return wrap([&] { want_arity(args, 3, name);
    return PValue::of_thm(sep::arith_subst_thm(th_, want_term(args, 0, name),
                                               want_term(args, 1, name),
                                               want_term(args, 2, name))); });
  if (name == "pure_intro") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(sep::pure_intro_thm(th_, want_term(args, 0, name), want_term(args, 1, name))); });
  if (name == "sep_drop_fact") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(sep::sep_drop_fact_thm(th_, want_term(args, 0, name), want_term(args, 1, name))); });
  if (name == "drop_unused_binders") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(sep::drop_unused_binders_thm(th_, want_term(args, 0, name))); });
  if (name == "sep_intro") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(sep::sep_intro_thm(th_, want_term(args, 0, name), want_thm(args, 1, name))); });
  if (name == "sep_match") return wrap([&] {
    if (args.size() < 2) throw VerifyError("sep_match needs a state and a target");
    Term state = want_term(args, 0, name);
    Term target = want_term(args, 1, name);
    std::vector<Term> wits;
    for (size_t i = 2; i < args.size(); ++i) wits.push_back(want_term(args, i, name));
    return PValue::of_thm(sep::sep_match_thm(th_, state, target, wits)); });
  if (name == "entail_of_eq") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(sep::entail_of_eq(th_, want_thm(args, 0, name))); });
  if (name == "entail_trans") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(sep::entail_trans_thm(th_, want_thm(args, 0, name), want_thm(args, 1, name))); });
  if (name == "entail_frame") return wrap([&] { want_arity(args, 2, name);
    return PValue::of_thm(sep::entail_frame(th_, want_thm(args, 0, name), want_term(args, 1, name))); });
  if (name == "entail_refl") return wrap([&] { want_arity(args, 1, name);
    return PValue::of_thm(sep::entail_refl_thm(th_, want_term(args, 0, name))); });

  if (name == "get_symbolic_state") return wrap([&] {
    want_arity(args, 0, name);
    if (!engine_) throw VerifyError("get_symbolic_state: no active symbolic execution");
    return PValue::of_term(engine_->state_term()); });
  if (name == "set_symbolic_state") return wrap([&] {
    want_arity(args, 1, name);
    if (!engine_) throw VerifyError("set_symbolic_state: no active symbolic execution");
    engine_->set_state_from(want_thm(args, 0, name));
    return PValue::unit(); });

  if (name == "assert_prove") return wrap([&] {
    want_arity(args, 2, name);
    Theorem th = want_thm(args, 0, name);
    Term goal = want_term(args, 1, name);
    if (!th.hypotheses().empty())
      throw VerifyError("assert_prove: theorem has hypotheses");
    if (!alpha_eq(th.conclusion(), goal))
      throw VerifyError("assert_prove: theorem concludes " +
                        quote::print_term(th.conclusion()) + " but the goal is " +
                        quote::print_term(goal));
    for (const auto& tag : th.axioms()) ctx_.trust.insert(tag);
    proved_.push_back({goal, th.axioms()});
    return PValue::unit(); });

  if (name == "fail") return wrap([&]() -> PValue {
    std::string msg = args.empty() || args[0].k != PValue::K::Str ? "fail()" : args[0].s;
    throw VerifyError("proof code failed: " + msg); });
  if (name == "trace") return wrap([&] {
    for (const auto& v : args) {
      std::string out;
      switch (v.k) {
        case PValue::K::Int: out = std::to_string(v.i); break;
        case PValue::K::Str: out = v.s; break;
        case PValue::K::TermV: out = quote::print_term(v.term); break;
        case PValue::K::ThmV: out = "|- " + quote::print_term(v.thm.conclusion()); break;
        default: out = v.kind_name(); break;
      }
      fprintf(stderr, "[trace] %s\n", out.c_str());
    }
    return PValue::unit(); });

  if (th_.has_lemma(name)) return wrap([&] {
    std::vector<Term> ts;
    for (size_t i = 0; i < args.size(); ++i) ts.push_back(want_term(args, i, name));
    return PValue::of_thm(th_.lemma(name, ts)); });

  throw VerifyError("proof code: call to unbound function " + name + " at " + span.file +
                    ":" + std::to_string(span.line));
}

// ---------------------------------------------------------------------------
// Blocks and drivers
// ---------------------------------------------------------------------------

void Interp::exec_block(const std::string& text, const cfront::Span& span,
                        std::shared_ptr<PEnv> scope) {
  PParser parser(text, span);
  auto items = parser.parse_block_items();
  auto saved = cur_scope_;
  cur_scope_ = std::move(scope);
  EvalVisitor v{*this};
  try {
    for (const auto& item : items) {
      if (item.func) {
        PValue fv;
        fv.k = PValue::K::Closure;
        fv.fn = item.func;
        fv.closure = cur_scope_;
        cur_scope_->declare(item.func->name, std::move(fv));
      } else {
        v.exec(item.stmt);
      }
    }
  } catch (ReturnSignal&) {
    cur_scope_ = saved;
    throw VerifyError("proof code: return outside of a function at " + span.file + ":" +
                      std::to_string(span.line));
  } catch (...) {
    cur_scope_ = saved;
    throw;
  }
  cur_scope_ = saved;
}

RunReport Interp::run_proof_program(const cfront::ProofProgram& prog) {
  RunReport report;
  for (const auto& [text, span] : prog.global_blocks) exec_block(text, span, file_scope_);
  for (const auto& driver : prog.drivers) {
    RunReport::PerFunction pf;
    pf.name = driver.function->name;
    auto function_scope = std::make_shared<PEnv>();
    function_scope->parent = file_scope_;
    auto saved_scope = cur_scope_;
    cur_scope_ = function_scope;  // attribute payloads resolve here during feeds
    engine::Engine* saved_engine = engine_;
    try {
      engine::Engine eng(ctx_, *driver.function);
      engine_ = &eng;
      for (const auto& step : driver.steps) {
        if (step.k == cfront::DriverStep::K::Feed) {
          eng.feed(driver.segments[step.segment_index]);
          ++pf.segments;
        } else {
          exec_block(step.text, step.span, function_scope);
          ++pf.proof_blocks;
        }
      }
    } catch (...) {
      engine_ = saved_engine;
      cur_scope_ = saved_scope;
      throw;
    }
    engine_ = saved_engine;
    cur_scope_ = saved_scope;
    report.functions.push_back(std::move(pf));
  }
  return report;
}

void Interp::run_residual(const cfront::CProgram& proofs) {
  bool saved = residual_mode_;
  residual_mode_ = true;
  try {
    for (const auto& [text, span] : proofs.global_proof_blocks)
      exec_block(text, span, file_scope_);
  } catch (...) {
    residual_mode_ = saved;
    throw;
  }
  residual_mode_ = saved;
}

}  // namespace cstar::proofrt
