// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include "cstar/quote.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>
#include <vector>

namespace cstar::quote {

namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok {
  End, Ident, Int, Addr,       // Addr carries the quoted name
  LParen, RParen, Comma, Dot, Colon, Lambda, Dollar, LBrace, RBrace,
  Op,                          // carries the operator spelling
  Exists, Forall,
};

struct Token {
  Tok kind;
  std::string text;
  size_t pos;
};

struct Lexer {
  const std::string& src;
  size_t i = 0;
  std::vector<Token> toks;

  explicit Lexer(const std::string& s) : src(s) { run(); }

  [[noreturn]] void fail(const std::string& msg, size_t at) {
    throw QuoteError("quotation: " + msg + " at offset " + std::to_string(at) + " in \"" +
                     src + "\"");
  }

  void run() {
    while (i < src.size()) {
      char c = src[i];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++i;
        continue;
      }
      size_t start = i;
      if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i;
        while (j < src.size() &&
               (isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
          ++j;
        std::string word = src.substr(i, j - i);
        i = j;
        if (word == "exists") {
          toks.push_back({Tok::Exists, word, start});
        } else if (word == "forall") {
          toks.push_back({Tok::Forall, word, start});
        } else if (word == "EXP") {
          toks.push_back({Tok::Op, "EXP", start});
        } else {
          toks.push_back({Tok::Ident, word, start});
        }
        continue;
      }
      if (isdigit(static_cast<unsigned char>(c))) {
        size_t j = i;
        while (j < src.size() && isdigit(static_cast<unsigned char>(src[j]))) ++j;
        toks.push_back({Tok::Int, src.substr(i, j - i), start});
        i = j;
        continue;
      }
      // UTF-8 binder glyphs
      if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < src.size()) {
        unsigned char b1 = src[i + 1], b2 = src[i + 2];
        if (b1 == 0x88 && b2 == 0x83) {  // exists
          toks.push_back({Tok::Exists, "exists", start});
          i += 3;
          continue;
        }
        if (b1 == 0x88 && b2 == 0x80) {  // forall
          toks.push_back({Tok::Forall, "forall", start});
          i += 3;
          continue;
        }
      }
      auto two = [&](const char* s) { return src.compare(i, 2, s) == 0; };
      auto three = [&](const char* s) { return src.compare(i, 3, s) == 0; };
      if (c == '&') {
        if (two("&&")) {
          toks.push_back({Tok::Op, "&&", start});
          i += 2;
          continue;
        }
        if (i + 1 < src.size() && src[i + 1] == '"') {
          size_t j = i + 2;
          while (j < src.size() && src[j] != '"') ++j;
          if (j >= src.size()) fail("unterminated address literal", start);
          toks.push_back({Tok::Addr, src.substr(i + 2, j - i - 2), start});
          i = j + 1;
          continue;
        }
        if (i + 1 < src.size() && isdigit(static_cast<unsigned char>(src[i + 1]))) {
          size_t j = i + 1;
          while (j < src.size() && isdigit(static_cast<unsigned char>(src[j]))) ++j;
          toks.push_back({Tok::Int, src.substr(i + 1, j - i - 1), start});
          i = j;
          continue;
        }
        fail("stray '&'", start);
      }
      if (three("==>") || three("<=>") || three("-|-") || three("|--")) {
        toks.push_back({Tok::Op, src.substr(i, 3), start});
        i += 3;
        continue;
      }
      if (two("**") || two("==") || two("!=") || two("<=") || two(">=") || two("||") ||
          two("->")) {
        toks.push_back({Tok::Op, src.substr(i, 2), start});
        i += 2;
        continue;
      }
      switch (c) {
        case '(': toks.push_back({Tok::LParen, "(", start}); ++i; continue;
        case ')': toks.push_back({Tok::RParen, ")", start}); ++i; continue;
        case ',': toks.push_back({Tok::Comma, ",", start}); ++i; continue;
        case '.': toks.push_back({Tok::Dot, ".", start}); ++i; continue;
        case ':': toks.push_back({Tok::Colon, ":", start}); ++i; continue;
        case '\\': toks.push_back({Tok::Lambda, "\\", start}); ++i; continue;
        case '$': toks.push_back({Tok::Dollar, "$", start}); ++i; continue;
        case '{': toks.push_back({Tok::LBrace, "{", start}); ++i; continue;
        case '}': toks.push_back({Tok::RBrace, "}", start}); ++i; continue;
        case '+': case '-': case '*': case '/': case '%': case '<': case '>':
        case '=': case '!': case '~':
          toks.push_back({Tok::Op, std::string(1, c), start});
          ++i;
          continue;
        default:
          fail(std::string("unexpected character '") + c + "'", start);
      }
    }
    toks.push_back({Tok::End, "", src.size()});
  }
};

// ---------------------------------------------------------------------------
// Surface AST
// ---------------------------------------------------------------------------

struct SExpr {
  enum class K {
    Int, Addr, Ident, OpSection, Anti, Apply, Binder, Lambda, Binary, Unary, Ascribe
  };
  K k;
  std::string text;                 // Ident/Addr name, operator spelling, anti var
  BigInt num;                       // Int
  HolType ty;                       // Anti, Ascribe, valid() via marker
  bool has_ty = false;
  std::vector<std::pair<std::string, HolType>> binders;  // Binder/Lambda
  std::vector<SExpr> kids;
  size_t pos = 0;
};

struct OpInfo {
  int level;
  bool right_assoc;
  bool non_assoc;
};

// Decreasing precedence per the grammar note in the header.
const std::map<std::string, OpInfo>& binary_ops() {
  static const std::map<std::string, OpInfo> table = {
      {"EXP", {9, false, false}},
      {"*", {8, false, false}},  {"/", {8, false, false}},  {"%", {8, false, false}},
      {"+", {7, false, false}},  {"-", {7, false, false}},
      {"<", {6, false, true}},   {"<=", {6, false, true}},  {">", {6, false, true}},
      {">=", {6, false, true}},  {"==", {6, false, true}},  {"!=", {6, false, true}},
      {"&&", {5, true, false}},
      {"||", {4, true, false}},
      {"<=>", {3, true, false}},
      {"==>", {2, true, false}},
      {"**", {2, true, false}},  // between ==> and the entailments, see level_of
      {"|--", {1, false, true}}, {"-|-", {1, false, true}},
  };
  return table;
}

OpInfo op_info(const std::string& op) { return binary_ops().at(op); }

// Numeric levels scaled by 10 so ** (15) sits between ==> (20) and |-- (10).
int level_of(const std::string& op) {
  if (op == "**") return 15;
  return op_info(op).level * 10;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
  const Kernel& k;
  Lexer lex;
  size_t p = 0;

  Parser(const Kernel& kk, const std::string& src) : k(kk), lex(src) {}

  const Token& peek(size_t ahead = 0) const {
    size_t idx = std::min(p + ahead, lex.toks.size() - 1);
    return lex.toks[idx];
  }
  Token next() { return lex.toks[std::min(p++, lex.toks.size() - 1)]; }
  [[noreturn]] void fail(const std::string& msg) { lex.fail(msg, peek().pos); }
  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what);
    ++p;
  }

  HolType parse_type_atom() {
    if (peek().kind == Tok::LParen) {
      ++p;
      HolType t = parse_type();
      expect(Tok::RParen, ")");
      return t;
    }
    if (peek().kind == Tok::Op && peek().text == "'") fail("type variables not allowed here");
    if (peek().kind != Tok::Ident) fail("expected a type");
    std::string name = next().text;
    if (name == "int_list") return list_ty(integer_ty());
    auto arity = k.type_arity(name);
    if (!arity) fail("unknown type " + name);
    std::vector<HolType> args;
    for (size_t n = 0; n < *arity; ++n) args.push_back(parse_type_atom());
    return HolType::app(name, std::move(args));
  }

  HolType parse_type() {
    HolType t = parse_type_atom();
    if (peek().kind == Tok::Op && peek().text == "->") {
      ++p;
      return fun_ty(t, parse_type());
    }
    return t;
  }

  std::vector<std::pair<std::string, HolType>> parse_binder_group() {
    std::vector<std::pair<std::string, HolType>> out;
    while (peek().kind == Tok::LParen) {
      ++p;
      if (peek().kind != Tok::Ident) fail("expected bound variable name");
      std::string name = next().text;
      expect(Tok::Colon, ":");
      HolType ty = parse_type();
      expect(Tok::RParen, ")");
      out.emplace_back(std::move(name), std::move(ty));
    }
    if (out.empty()) fail("expected (name:type) after binder");
    return out;
  }

  SExpr parse_expr(int min_level) {
    // Binders swallow everything to the right.
    if (peek().kind == Tok::Exists || peek().kind == Tok::Forall ||
        peek().kind == Tok::Lambda) {
      Token b = next();
      SExpr e;
      e.k = b.kind == Tok::Lambda ? SExpr::K::Lambda : SExpr::K::Binder;
      e.text = b.kind == Tok::Exists ? "exists" : (b.kind == Tok::Forall ? "forall" : "\\");
      e.pos = b.pos;
      e.binders = parse_binder_group();
      expect(Tok::Dot, ".");
      e.kids.push_back(parse_expr(0));
      return e;
    }
    SExpr lhs = parse_unary();
    for (;;) {
      if (peek().kind != Tok::Op) break;
      std::string op = peek().text;
      if (!binary_ops().count(op)) break;
      int lvl = level_of(op);
      if (lvl < min_level) break;
      OpInfo info = op_info(op);
      ++p;
      int next_min = info.right_assoc ? lvl : lvl + 1;
      SExpr rhs = parse_expr(next_min);
      SExpr e;
      e.k = SExpr::K::Binary;
      e.text = op;
      e.pos = lhs.pos;
      e.kids.push_back(std::move(lhs));
      e.kids.push_back(std::move(rhs));
      lhs = std::move(e);
      if (info.non_assoc && peek().kind == Tok::Op && peek().text == op)
        fail("operator " + op + " is non-associative");
    }
    return lhs;
  }

  SExpr parse_unary() {
    if (peek().kind == Tok::Op && (peek().text == "-" || peek().text == "!" ||
                                   peek().text == "~")) {
      Token t = next();
      SExpr e;
      e.k = SExpr::K::Unary;
      e.text = t.text;
      e.pos = t.pos;
      e.kids.push_back(parse_unary());
      return e;
    }
    return parse_application();
  }

  bool starts_atom() const {
    switch (peek().kind) {
      case Tok::Ident:
      case Tok::Int:
      case Tok::Addr:
      case Tok::Dollar:
      case Tok::LParen:
        return true;
      default:
        return false;
    }
  }

  SExpr parse_application() {
    SExpr head = parse_atom();
    for (;;) {
      // `(op)` after an atom is a juxtaposed operator section, not a call.
      bool op_section = peek().kind == Tok::LParen && peek(1).kind == Tok::Op &&
                        peek(2).kind == Tok::RParen;
      if (peek().kind == Tok::LParen && !op_section) {
        ++p;
        SExpr app;
        app.k = SExpr::K::Apply;
        app.pos = head.pos;
        app.kids.push_back(std::move(head));
        if (peek().kind != Tok::RParen) {
          app.kids.push_back(parse_expr(0));
          while (peek().kind == Tok::Comma) {
            ++p;
            app.kids.push_back(parse_expr(0));
          }
        }
        expect(Tok::RParen, ")");
        head = std::move(app);
      } else if (starts_atom()) {
        SExpr app;
        app.k = SExpr::K::Apply;
        app.pos = head.pos;
        app.kids.push_back(std::move(head));
        app.kids.push_back(parse_atom());
        head = std::move(app);
      } else {
        break;
      }
    }
    return head;
  }

  SExpr parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int: {
        ++p;
        SExpr e;
        e.k = SExpr::K::Int;
        e.num = BigInt::from_string(t.text);
        e.pos = t.pos;
        return e;
      }
      case Tok::Addr: {
        ++p;
        SExpr e;
        e.k = SExpr::K::Addr;
        e.text = t.text;
        e.pos = t.pos;
        return e;
      }
      case Tok::Ident: {
        ++p;
        SExpr e;
        e.k = SExpr::K::Ident;
        e.text = t.text;
        e.pos = t.pos;
        return e;
      }
      case Tok::Dollar: {
        ++p;
        expect(Tok::LBrace, "{");
        if (peek().kind != Tok::Ident) fail("expected variable in anti-quotation");
        std::string name = next().text;
        expect(Tok::Colon, ":");
        HolType ty = parse_type();
        expect(Tok::RBrace, "}");
        SExpr e;
        e.k = SExpr::K::Anti;
        e.text = name;
        e.ty = ty;
        e.has_ty = true;
        e.pos = t.pos;
        return e;
      }
      case Tok::LParen: {
        ++p;
        // Operator section (**) etc.
        if (peek().kind == Tok::Op && peek(1).kind == Tok::RParen) {
          std::string op = next().text;
          ++p;  // )
          SExpr e;
          e.k = SExpr::K::OpSection;
          e.text = op;
          e.pos = t.pos;
          return e;
        }
        SExpr inner = parse_expr(0);
        if (peek().kind == Tok::Colon) {
          ++p;
          HolType ty = parse_type();
          SExpr e;
          e.k = SExpr::K::Ascribe;
          e.ty = ty;
          e.has_ty = true;
          e.pos = t.pos;
          e.kids.push_back(std::move(inner));
          inner = std::move(e);
        }
        expect(Tok::RParen, ")");
        return inner;
      }
      default:
        fail("expected a term");
    }
  }
};

// ---------------------------------------------------------------------------
// Elaboration
// ---------------------------------------------------------------------------

struct Elab {
  const Kernel& k;
  const SyntaxEnv& env;
  std::vector<std::pair<std::string, Term>> scope;  // binder stack
  int fresh_tyvar = 0;

  [[noreturn]] void fail(const std::string& msg) { throw QuoteError("quotation: " + msg); }

  bool has_tyvars(const HolType& ty) {
    std::vector<HolType> vs;
    collect_tyvars(ty, vs);
    return !vs.empty();
  }

  Term freshen_const(const std::string& name) {
    HolType gen = k.constant_type(name);
    std::vector<HolType> vs;
    collect_tyvars(gen, vs);
    if (vs.empty()) return k.mk_const(name, gen);
    TypeSubst subst;
    for (const auto& v : vs)
      subst.emplace_back(v, HolType::var("?" + std::to_string(fresh_tyvar++)));
    return k.mk_const(name, apply_type_subst(subst, gen));
  }

  std::optional<Term> lookup(const std::string& name) {
    for (size_t i = scope.size(); i-- > 0;)
      if (scope[i].first == name) return scope[i].second;
    auto it = env.vars.find(name);
    if (it != env.vars.end()) return it->second;
    return std::nullopt;
  }

  // Fix remaining type variables in `t` by matching its type against
  // `expected`.
  Term coerce(Term t, const std::optional<HolType>& expected, const std::string& what) {
    if (!expected) return t;
    if (t.type() == *expected) return t;
    TypeSubst subst;
    if (match_type(t.type(), *expected, subst)) return subst_term_types(subst, t);
    fail(what + " has type " + t.type().to_string() + " where " + expected->to_string() +
         " was expected");
  }

  Term elab(const SExpr& e, const std::optional<HolType>& expected) {
    switch (e.k) {
      case SExpr::K::Int:
        return coerce(mk_int_literal(e.num), expected, "integer literal");
      case SExpr::K::Addr:
        return coerce(mk_address_const(e.text), expected, "address");
      case SExpr::K::Ident: {
        if (auto t = lookup(e.text)) return coerce(*t, expected, e.text);
        if (k.has_constant(e.text)) return coerce(freshen_const(e.text), expected, e.text);
        if (env.allow_free_vars) {
          if (!expected)
            fail("cannot infer a type for free variable " + e.text +
                 "; ascribe it as (" + e.text + ":ty)");
          return mk_var(e.text, *expected);
        }
        fail("unbound identifier " + e.text);
      }
      case SExpr::K::OpSection: {
        if (e.text == "**") return k.constant("**");
        if (e.text == "+") return k.constant("+");
        fail("operator section (" + e.text + ") not supported");
      }
      case SExpr::K::Anti: {
        if (!env.antiquote) fail("anti-quotation ${" + e.text + ":...} with no proof scope");
        Term t = env.antiquote(e.text, e.ty);
        if (!(t.type() == e.ty))
          fail("anti-quotation ${" + e.text + "} has type " + t.type().to_string() +
               ", annotation says " + e.ty.to_string());
        return coerce(t, expected, "anti-quotation");
      }
      case SExpr::K::Ascribe: {
        Term t = elab(e.kids[0], e.ty);
        if (!(t.type() == e.ty))
          fail("ascription mismatch: " + t.type().to_string() + " vs " + e.ty.to_string());
        return coerce(t, expected, "ascription");
      }
      case SExpr::K::Apply: {
        Term head = elab(e.kids[0], std::nullopt);
        for (size_t i = 1; i < e.kids.size(); ++i) {
          if (!head.type().is_fun())
            fail("term of type " + head.type().to_string() + " applied to an argument");
          HolType want = head.type().fun_from();
          if (!has_tyvars(want)) {
            head = mk_app(head, elab(e.kids[i], want));
          } else {
            Term a = elab(e.kids[i], std::nullopt);
            TypeSubst subst;
            if (!match_type(want, a.type(), subst))
              fail("argument type " + a.type().to_string() + " does not fit " +
                   want.to_string());
            head = mk_app(subst_term_types(subst, head), a);
          }
        }
        return coerce(head, expected, "application");
      }
      case SExpr::K::Lambda:
      case SExpr::K::Binder: {
        std::vector<Term> vars;
        for (const auto& [name, ty] : e.binders) {
          Term v = mk_var(name, ty);
          vars.push_back(v);
          scope.emplace_back(name, v);
        }
        Term body = elab(e.kids[0], std::nullopt);
        scope.resize(scope.size() - e.binders.size());
        Term out = body;
        for (size_t i = vars.size(); i-- > 0;) {
          if (e.k == SExpr::K::Lambda) {
            out = mk_abs(vars[i], out);
          } else if (e.text == "exists" && out.type() == hprop_ty()) {
            Term hex = k.mk_const(
                "hexists", fun_ty(fun_ty(vars[i].type(), hprop_ty()), hprop_ty()));
            out = mk_app(hex, mk_abs(vars[i], out));
          } else if (out.type() == bool_ty()) {
            Term q = k.mk_const(e.text == "exists" ? "?" : "!",
                                fun_ty(fun_ty(vars[i].type(), bool_ty()), bool_ty()));
            out = mk_app(q, mk_abs(vars[i], out));
          } else {
            fail("binder body must be bool or hprop, got " + out.type().to_string());
          }
        }
        return coerce(out, expected, "binder");
      }
      case SExpr::K::Unary: {
        if (e.text == "-") {
          Term a = elab(e.kids[0], integer_ty());
          return coerce(mk_app(k.constant("--"), a), expected, "negation");
        }
        Term a = elab(e.kids[0], bool_ty());
        return coerce(mk_app(k.constant("~"), a), expected, "negation");
      }
      case SExpr::K::Binary:
        return elab_binary(e, expected);
    }
    fail("internal: unhandled expression");
  }

  Term mk_bin(const std::string& const_name, const Term& a, const Term& b) {
    return mk_app(mk_app(k.constant(const_name), a), b);
  }

  Term elab_binary(const SExpr& e, const std::optional<HolType>& expected) {
    const std::string& op = e.text;
    auto int_op = [&](const char* name) {
      Term a = elab(e.kids[0], integer_ty());
      Term b = elab(e.kids[1], integer_ty());
      return mk_bin(name, a, b);
    };
    Term out;
    if (op == "+" || op == "-" || op == "*" || op == "/" || op == "%" || op == "EXP") {
      out = int_op(op.c_str());
    } else if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      out = int_op(op.c_str());
    } else if (op == "==" || op == "!=") {
      Term a = elab(e.kids[0], std::nullopt);
      if (has_tyvars(a.type())) a = elab(e.kids[0], integer_ty());
      Term b = elab(e.kids[1], a.type());
      out = k.mk_eq(a, b);
      if (op == "!=") out = mk_app(k.constant("~"), out);
    } else if (op == "<=>") {
      Term a = elab(e.kids[0], bool_ty());
      Term b = elab(e.kids[1], bool_ty());
      out = k.mk_eq(a, b);
    } else if (op == "-|-") {
      Term a = elab(e.kids[0], hprop_ty());
      Term b = elab(e.kids[1], hprop_ty());
      out = k.mk_eq(a, b);
    } else if (op == "|--") {
      out = mk_bin("|--", elab(e.kids[0], hprop_ty()), elab(e.kids[1], hprop_ty()));
    } else if (op == "**") {
      out = mk_bin("**", elab(e.kids[0], hprop_ty()), elab(e.kids[1], hprop_ty()));
    } else if (op == "==>") {
      out = mk_bin("==>", elab(e.kids[0], bool_ty()), elab(e.kids[1], bool_ty()));
    } else if (op == "&&" || op == "||") {
      std::optional<HolType> want;
      if (expected && (*expected == bool_ty() || *expected == hprop_ty())) want = expected;
      Term a = want ? elab(e.kids[0], want) : elab(e.kids[0], std::nullopt);
      if (a.type() == hprop_ty()) {
        if (op == "||") fail("|| is not defined on hprop");
        Term b = elab(e.kids[1], hprop_ty());
        out = mk_bin("hand", a, b);
      } else if (a.type() == bool_ty()) {
        Term b = elab(e.kids[1], bool_ty());
        out = mk_bin(op, a, b);
      } else {
        fail(op + " expects bool or hprop operands, got " + a.type().to_string());
      }
    } else {
      fail("unknown operator " + op);
    }
    return coerce(out, expected, "operator " + op);
  }
};

}  // namespace

Term parse_term(const Kernel& k, const std::string& src, const SyntaxEnv& env) {
  Parser p(k, src);
  SExpr s = p.parse_expr(0);
  if (p.peek().kind != Tok::End) p.fail("trailing input after term");
  Elab e{k, env, {}, 0};
  Term t = e.elab(s, std::nullopt);
  std::vector<HolType> vs;
  collect_tyvars(t.type(), vs);
  if (!vs.empty())
    throw QuoteError("quotation: could not infer a ground type for \"" + src + "\"");
  return t;
}

Term parse_hprop(const Kernel& k, const std::string& src, const SyntaxEnv& env) {
  Parser p(k, src);
  SExpr s = p.parse_expr(0);
  if (p.peek().kind != Tok::End) p.fail("trailing input after term");
  Elab e{k, env, {}, 0};
  Term t = e.elab(s, hprop_ty());
  if (!(t.type() == hprop_ty()))
    throw QuoteError("quotation: expected hprop, inferred " + t.type().to_string() +
                     " for \"" + src + "\"");
  return t;
}

HolType parse_type(const Kernel& k, const std::string& src) {
  Parser p(k, src);
  HolType t = p.parse_type();
  if (p.peek().kind != Tok::End) p.fail("trailing input after type");
  return t;
}

std::pair<std::string, HolType> parse_typed_name(const Kernel& k, const std::string& src) {
  Parser p(k, src);
  if (p.peek().kind != Tok::Ident) p.fail("expected a name");
  std::string name = p.next().text;
  p.expect(Tok::Colon, ":");
  HolType ty = p.parse_type();
  if (p.peek().kind != Tok::End) p.fail("trailing input after declaration");
  return {name, ty};
}

std::pair<std::string, std::string> split_binding(const std::string& src) {
  Lexer lex(src);
  if (lex.toks.size() < 3 || lex.toks[0].kind != Tok::Ident ||
      lex.toks[1].kind != Tok::Op || lex.toks[1].text != "=")
    throw QuoteError("expected `name = term` in \"" + src + "\"");
  size_t eq_end = lex.toks[1].pos + 1;
  return {lex.toks[0].text, src.substr(eq_end)};
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

struct Printer {
  std::ostringstream out;

  static bool is_binder_app(const Term& t, std::string& spelling) {
    if (!t.is_app() || !t.fn().is_const() || !t.arg().is_abs()) return false;
    const std::string& n = t.fn().name();
    if (n == "hexists" || n == "?") {
      spelling = "exists";
      return true;
    }
    if (n == "!") {
      spelling = "forall";
      return true;
    }
    return false;
  }

  static std::optional<std::string> infix_spelling(const Term& t) {
    if (!t.is_app() || !t.fn().is_app()) return std::nullopt;
    const Term& head = t.fn().fn();
    if (!head.is_const()) return std::nullopt;
    const std::string& n = head.name();
    if (n == "=") {
      HolType arg = t.fn().arg().type();
      if (arg == bool_ty()) return "<=>";
      if (arg == hprop_ty()) return "-|-";
      return "==";
    }
    if (n == "hand") return "&&";
    static const char* plain[] = {"**", "|--", "==>", "&&", "||", "+", "-", "*", "/",
                                  "%", "<", "<=", ">", ">=", "EXP"};
    for (const char* s : plain)
      if (n == s) return n;
    return std::nullopt;
  }

  void print(const Term& t, int level) {
    // unary minus
    if (t.is_app() && t.fn().is_const() && t.fn().name() == "--") {
      maybe_paren(level > 90, [&] {
        out << "-";
        print(t.arg(), 91);
      });
      return;
    }
    if (t.is_app() && t.fn().is_const() && t.fn().name() == "~") {
      maybe_paren(level > 90, [&] {
        out << "!";
        print(t.arg(), 91);
      });
      return;
    }
    std::string binder;
    if (is_binder_app(t, binder)) {
      maybe_paren(level > 0, [&] {
        out << binder;
        Term cur = t;
        std::string b2;
        for (;;) {
          const Term& lam = cur.arg();
          out << " (" << lam.bound_var().name() << ":" << print_type(lam.bound_var().type())
              << ")";
          cur = lam.body();
          if (!(is_binder_app(cur, b2) && b2 == binder)) break;
        }
        out << ". ";
        print(cur, 0);
      });
      return;
    }
    if (auto op = infix_spelling(t)) {
      int lvl = level_of(*op);
      OpInfo info = op_info(*op);
      maybe_paren(level > lvl, [&] {
        print(t.fn().arg(), info.right_assoc || info.non_assoc ? lvl + 1 : lvl);
        out << " " << *op << " ";
        print(t.arg(), info.right_assoc ? lvl : lvl + 1);
      });
      return;
    }
    switch (t.kind()) {
      case Term::Kind::Var:
        out << t.name();
        return;
      case Term::Kind::Const: {
        if (t.name() == "**" || t.name() == "+") {
          out << "(" << t.name() << ")";
          return;
        }
        out << t.name();
        return;
      }
      case Term::Kind::Abs:
        maybe_paren(level > 0, [&] {
          out << "\\(" << t.bound_var().name() << ":" << print_type(t.bound_var().type())
              << "). ";
          print(t.body(), 0);
        });
        return;
      case Term::Kind::App: {
        std::vector<Term> args;
        Term head = strip_app(t, args);
        if (head.is_abs()) {
          out << "(";
          print(head, 0);
          out << ")";
        } else {
          print(head, 101);
        }
        out << "(";
        for (size_t i = 0; i < args.size(); ++i) {
          if (i) out << ", ";
          print(args[i], 0);
        }
        out << ")";
        return;
      }
    }
  }

  template <class F>
  void maybe_paren(bool yes, F f) {
    if (yes) out << "(";
    f();
    if (yes) out << ")";
  }
};

}  // namespace

std::string print_type(const HolType& ty) {
  if (ty.kind() == HolType::Kind::Var) return "'" + ty.name();
  if (ty.is_fun()) {
    std::string from = print_type(ty.fun_from());
    if (ty.fun_from().is_fun()) from = "(" + from + ")";
    return from + " -> " + print_type(ty.fun_to());
  }
  std::string s = ty.name();
  for (const auto& a : ty.args()) {
    bool paren = a.kind() == HolType::Kind::App && !a.args().empty();
    s += " " + std::string(paren ? "(" : "") + print_type(a) + (paren ? ")" : "");
  }
  return s;
}

std::string print_term(const Term& t) {
  Printer p;
  p.print(t, 0);
  return p.out.str();
}

}  // namespace cstar::quote
