// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include "cstar/cfront.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace cstar::cfront {

bool CType::operator==(const CType& o) const {
  if (k != o.k) return false;
  if (k != K::Ptr) return true;
  if (!pointee || !o.pointee) return true;  // opaque pointers match any pointer
  return *pointee == *o.pointee;
}

std::string CType::to_string() const {
  switch (k) {
    case K::Void: return "void";
    case K::Int: return "int";
    case K::Char: return "char";
    case K::UChar: return "unsigned char";
    case K::Ptr: return (pointee ? pointee->to_string() : std::string("struct <opaque>")) + " *";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Include preprocessing (textual, quote form only)
// ---------------------------------------------------------------------------

namespace {

struct SourceLine {
  std::string text;
  std::string file;
  int line;
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dirname_of(const std::string& path) {
  auto pos = path.find_last_of('/');
  if (pos == std::string::npos) return ".";
  return path.substr(0, pos);
}

void preprocess(const std::string& source, const std::string& filename,
                const std::vector<std::string>& paths, std::set<std::string>& visited,
                std::vector<SourceLine>& out) {
  std::istringstream in(source);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = line;
    size_t ws = trimmed.find_first_not_of(" \t");
    if (ws != std::string::npos && trimmed[ws] == '#') {
      std::string directive = trimmed.substr(ws);
      if (directive.rfind("#include", 0) == 0) {
        size_t q1 = directive.find('"');
        size_t q2 = q1 == std::string::npos ? std::string::npos : directive.find('"', q1 + 1);
        if (q1 == std::string::npos || q2 == std::string::npos)
          throw ParseError("only #include \"file\" is supported", lineno, 1);
        std::string want = directive.substr(q1 + 1, q2 - q1 - 1);
        std::optional<std::string> content;
        std::string resolved;
        std::vector<std::string> search = {dirname_of(filename)};
        search.insert(search.end(), paths.begin(), paths.end());
        for (const auto& dir : search) {
          resolved = dir + "/" + want;
          content = read_file(resolved);
          if (content) break;
        }
        if (!content)
          throw ParseError("cannot resolve #include \"" + want + "\"", lineno, 1);
        if (visited.insert(resolved).second)
          preprocess(*content, resolved, paths, visited, out);
        continue;
      }
      throw ParseError("unsupported preprocessor directive: " + directive, lineno, 1);
    }
    out.push_back({line, filename, lineno});
  }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok {
  End, Ident, Number, CharLit,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Semi, Comma, Star, Assign,
  Attribute,    // [[...]]: text = inner payload "ns::name(arg)" raw
  ProofSugar,   // «...»: text = raw proof code
  Op,           // other operators
};

struct Token {
  Tok kind;
  std::string text;
  std::string attr_name;     // Attribute: canonical name without namespace
  std::string attr_payload;  // Attribute: raw argument text
  Span span;
  BigInt number;
};

struct Lexer {
  std::string src;
  std::vector<Span> line_map;  // per character? per line: origin spans
  std::vector<size_t> line_starts;
  std::vector<SourceLine> lines;
  std::vector<Token> toks;
  size_t i = 0;
  int cur_line = 1;

  explicit Lexer(const std::vector<SourceLine>& ls) : lines(ls) {
    std::ostringstream ss;
    for (const auto& l : ls) ss << l.text << "\n";
    src = ss.str();
    size_t pos = 0;
    for (const auto& l : ls) {
      line_starts.push_back(pos);
      pos += l.text.size() + 1;
    }
    run();
  }

  Span span_at(size_t off) const {
    // binary search the line
    size_t lo = 0, hi = line_starts.size();
    while (lo + 1 < hi) {
      size_t mid = (lo + hi) / 2;
      if (line_starts[mid] <= off)
        lo = mid;
      else
        hi = mid;
    }
    if (lines.empty()) return {"<empty>", 0, 0};
    return {lines[lo].file, lines[lo].line, static_cast<int>(off - line_starts[lo]) + 1};
  }

  [[noreturn]] void fail(const std::string& msg, size_t off) {
    Span s = span_at(off);
    throw ParseError(msg + " (" + s.file + ")", s.line, s.col);
  }

  bool at(const char* s) const { return src.compare(i, strlen(s), s) == 0; }

  void skip_ws_and_comments() {
    for (;;) {
      while (i < src.size() && isspace(static_cast<unsigned char>(src[i]))) ++i;
      if (at("//")) {
        while (i < src.size() && src[i] != '\n') ++i;
        continue;
      }
      if (at("/*")) {
        size_t start = i;
        i += 2;
        while (i < src.size() && !at("*/")) ++i;
        if (i >= src.size()) fail("unterminated comment", start);
        i += 2;
        continue;
      }
      break;
    }
  }

  // captures balanced-paren payload starting after '('; respects backtick
  // quotations, string and char literals, and comments
  std::string capture_payload(size_t open_off) {
    int depth = 1;
    std::string out;
    while (i < src.size()) {
      char c = src[i];
      if (c == '`') {
        out.push_back(c);
        ++i;
        while (i < src.size() && src[i] != '`') out.push_back(src[i++]);
        if (i >= src.size()) fail("unterminated quotation", open_off);
        out.push_back('`');
        ++i;
        continue;
      }
      if (c == '"') {
        out.push_back(c);
        ++i;
        while (i < src.size() && src[i] != '"') {
          if (src[i] == '\\' && i + 1 < src.size()) out.push_back(src[i++]);
          out.push_back(src[i++]);
        }
        if (i >= src.size()) fail("unterminated string", open_off);
        out.push_back('"');
        ++i;
        continue;
      }
      if (at("/*")) {
        size_t start = i;
        while (i < src.size() && !at("*/")) out.push_back(src[i++]);
        if (i >= src.size()) fail("unterminated comment", start);
        out += "*/";
        i += 2;
        continue;
      }
      if (at("//")) {
        while (i < src.size() && src[i] != '\n') out.push_back(src[i++]);
        continue;
      }
      if (c == '(') ++depth;
      if (c == ')') {
        --depth;
        if (depth == 0) {
          ++i;
          return out;
        }
      }
      out.push_back(c);
      ++i;
    }
    fail("unterminated attribute payload", open_off);
  }

  void run() {
    while (true) {
      skip_ws_and_comments();
      if (i >= src.size()) break;
      size_t start = i;
      char c = src[i];
      // guillemet proof block: UTF-8 AB / BB with C2 prefix
      if (static_cast<unsigned char>(c) == 0xC2 && i + 1 < src.size() &&
          static_cast<unsigned char>(src[i + 1]) == 0xAB) {
        i += 2;
        std::string body;
        while (i < src.size() &&
               !(static_cast<unsigned char>(src[i]) == 0xC2 &&
                 i + 1 < src.size() && static_cast<unsigned char>(src[i + 1]) == 0xBB))
          body.push_back(src[i++]);
        if (i >= src.size()) fail("unterminated proof block", start);
        i += 2;
        Token t{Tok::ProofSugar, body, "", "", span_at(start), BigInt()};
        toks.push_back(std::move(t));
        continue;
      }
      if (at("[[")) {
        i += 2;
        skip_ws_and_comments();
        std::string name;
        while (i < src.size() &&
               (isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_' || src[i] == ':'))
          name.push_back(src[i++]);
        // strip namespace
        auto pos = name.rfind("::");
        std::string canonical = pos == std::string::npos ? name : name.substr(pos + 2);
        skip_ws_and_comments();
        std::string payload;
        if (i < src.size() && src[i] == '(') {
          ++i;
          payload = capture_payload(start);
        }
        skip_ws_and_comments();
        if (!at("]]")) fail("expected ]] to close attribute", start);
        i += 2;
        Token t{Tok::Attribute, name, canonical, payload, span_at(start), BigInt()};
        toks.push_back(std::move(t));
        continue;
      }
      if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i;
        while (j < src.size() &&
               (isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
          ++j;
        toks.push_back({Tok::Ident, src.substr(i, j - i), "", "", span_at(start), BigInt()});
        i = j;
        continue;
      }
      if (isdigit(static_cast<unsigned char>(c))) {
        size_t j = i;
        while (j < src.size() && isdigit(static_cast<unsigned char>(src[j]))) ++j;
        Token t{Tok::Number, src.substr(i, j - i), "", "", span_at(start), BigInt()};
        t.number = BigInt::from_string(t.text);
        toks.push_back(std::move(t));
        i = j;
        continue;
      }
      if (c == '\'') {
        // character literal, value only
        ++i;
        if (i >= src.size()) fail("unterminated character literal", start);
        long long v = 0;
        if (src[i] == '\\') {
          ++i;
          switch (src[i]) {
            case 'n': v = '\n'; break;
            case 't': v = '\t'; break;
            case '0': v = 0; break;
            case '\\': v = '\\'; break;
            case '\'': v = '\''; break;
            default: fail("unsupported escape", start);
          }
          ++i;
        } else {
          v = static_cast<unsigned char>(src[i++]);
        }
        if (i >= src.size() || src[i] != '\'') fail("unterminated character literal", start);
        ++i;
        Token t{Tok::CharLit, "", "", "", span_at(start), BigInt(v)};
        toks.push_back(std::move(t));
        continue;
      }
      auto push_op = [&](const char* s) {
        toks.push_back({Tok::Op, s, "", "", span_at(start), BigInt()});
        i += strlen(s);
      };
      switch (c) {
        case '(': toks.push_back({Tok::LParen, "(", "", "", span_at(start), BigInt()}); ++i; continue;
        case ')': toks.push_back({Tok::RParen, ")", "", "", span_at(start), BigInt()}); ++i; continue;
        case '{': toks.push_back({Tok::LBrace, "{", "", "", span_at(start), BigInt()}); ++i; continue;
        case '}': toks.push_back({Tok::RBrace, "}", "", "", span_at(start), BigInt()}); ++i; continue;
        case '[': toks.push_back({Tok::LBracket, "[", "", "", span_at(start), BigInt()}); ++i; continue;
        case ']': toks.push_back({Tok::RBracket, "]", "", "", span_at(start), BigInt()}); ++i; continue;
        case ';': toks.push_back({Tok::Semi, ";", "", "", span_at(start), BigInt()}); ++i; continue;
        case ',': toks.push_back({Tok::Comma, ",", "", "", span_at(start), BigInt()}); ++i; continue;
        default: break;
      }
      if (at("==")) { push_op("=="); continue; }
      if (at("!=")) { push_op("!="); continue; }
      if (at("<=")) { push_op("<="); continue; }
      if (at(">=")) { push_op(">="); continue; }
      if (at("&&")) { push_op("&&"); continue; }
      if (at("||")) { push_op("||"); continue; }
      if (c == '=') {
        toks.push_back({Tok::Assign, "=", "", "", span_at(start), BigInt()});
        ++i;
        continue;
      }
      if (c == '*') {
        toks.push_back({Tok::Star, "*", "", "", span_at(start), BigInt()});
        ++i;
        continue;
      }
      if (std::string("+-/%<>!&").find(c) != std::string::npos) {
        push_op(std::string(1, c).c_str());
        continue;
      }
      fail(std::string("unexpected character '") + c + "'", start);
    }
    toks.push_back({Tok::End, "", "", "", span_at(src.size() ? src.size() - 1 : 0), BigInt()});
  }
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

const std::set<std::string> kTypeStarters = {"void", "int", "char", "unsigned", "struct"};
const std::set<std::string> kUnsupportedStmts = {"for", "do", "switch", "goto"};

struct Parser {
  Lexer lex;
  size_t p = 0;

  explicit Parser(const std::vector<SourceLine>& lines) : lex(lines) {}

  const Token& peek(size_t ahead = 0) const {
    return lex.toks[std::min(p + ahead, lex.toks.size() - 1)];
  }
  Token next() { return lex.toks[std::min(p++, lex.toks.size() - 1)]; }
  [[noreturn]] void fail(const std::string& msg) {
    const Token& t = peek();
    throw ParseError(msg + " near '" + (t.kind == Tok::End ? "<eof>" : t.text) + "' (" +
                         t.span.file + ")",
                     t.span.line, t.span.col);
  }
  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what);
    ++p;
  }
  bool accept(Tok kind) {
    if (peek().kind == kind) {
      ++p;
      return true;
    }
    return false;
  }
  bool accept_ident(const char* word) {
    if (peek().kind == Tok::Ident && peek().text == word) {
      ++p;
      return true;
    }
    return false;
  }

  bool type_starts_here() const {
    return peek().kind == Tok::Ident && kTypeStarters.count(peek().text) > 0;
  }

  CType parse_base_type() {
    if (accept_ident("void")) return CType::void_t();
    if (accept_ident("int")) return CType::int_t();
    if (accept_ident("char")) return CType::char_t();
    if (accept_ident("unsigned")) {
      if (accept_ident("char")) return CType::uchar_t();
      if (accept_ident("int")) return CType::int_t();
      return CType::int_t();
    }
    if (accept_ident("struct")) {
      if (peek().kind != Tok::Ident) fail("expected struct tag");
      ++p;  // tag is opaque
      return CType{CType::K::Void, nullptr};  // must become a pointer
    }
    fail("expected a type");
  }

  CType parse_type() {
    CType t = parse_base_type();
    bool was_struct = false;
    while (peek().kind == Tok::Star) {
      ++p;
      t = CType::ptr_to(t);
      was_struct = true;
    }
    (void)was_struct;
    return t;
  }

  // --- expressions (C subset) ---

  ExprPtr mk_expr(Expr e) { return std::make_shared<Expr>(std::move(e)); }

  ExprPtr parse_primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number || t.kind == Tok::CharLit) {
      Expr e;
      e.k = Expr::K::IntLit;
      e.value = t.number;
      e.span = t.span;
      ++p;
      return mk_expr(std::move(e));
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "sizeof") {
        Span sp = t.span;
        ++p;
        expect(Tok::LParen, "(");
        CType ty = parse_type();
        expect(Tok::RParen, ")");
        Expr e;
        e.k = Expr::K::SizeofType;
        e.ctype = ty;
        e.span = sp;
        return mk_expr(std::move(e));
      }
      Expr e;
      e.k = Expr::K::Var;
      e.name = t.text;
      e.span = t.span;
      ++p;
      return mk_expr(std::move(e));
    }
    if (t.kind == Tok::LParen) {
      ++p;
      ExprPtr inner = parse_expr();
      expect(Tok::RParen, ")");
      return inner;
    }
    fail("expected an expression");
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (peek().kind == Tok::LBracket) {
      Span sp = peek().span;
      ++p;
      ExprPtr idx = parse_expr();
      expect(Tok::RBracket, "]");
      Expr out;
      out.k = Expr::K::Index;
      out.a = e;
      out.b = idx;
      out.span = sp;
      e = mk_expr(std::move(out));
    }
    return e;
  }

  bool cast_starts_here() const {
    if (peek().kind != Tok::LParen) return false;
    const Token& t1 = peek(1);
    return t1.kind == Tok::Ident && kTypeStarters.count(t1.text) > 0;
  }

  ExprPtr parse_unary() {
    const Token& t = peek();
    auto unary = [&](const char* op) {
      Span sp = t.span;
      ++p;
      Expr e;
      e.k = Expr::K::Unary;
      e.name = op;
      e.a = parse_unary();
      e.span = sp;
      return mk_expr(std::move(e));
    };
    if (t.kind == Tok::Op && t.text == "-") return unary("-");
    if (t.kind == Tok::Op && t.text == "!") return unary("!");
    if (t.kind == Tok::Op && t.text == "&") return unary("&");
    if (t.kind == Tok::Star) return unary("*");
    if (cast_starts_here()) {
      Span sp = t.span;
      ++p;
      CType ty = parse_type();
      expect(Tok::RParen, ")");
      Expr e;
      e.k = Expr::K::Cast;
      e.ctype = ty;
      e.a = parse_unary();
      e.span = sp;
      return mk_expr(std::move(e));
    }
    return parse_postfix();
  }

  int binop_level(const Token& t) const {
    if (t.kind == Tok::Star) return 5;
    if (t.kind != Tok::Op) return -1;
    const std::string& s = t.text;
    if (s == "/" || s == "%") return 5;
    if (s == "+" || s == "-") return 4;
    if (s == "<" || s == "<=" || s == ">" || s == ">=") return 3;
    if (s == "==" || s == "!=") return 2;
    if (s == "&&") return 1;
    if (s == "||") return 0;
    return -1;
  }

  ExprPtr parse_binary(int min_level) {
    ExprPtr lhs = parse_unary();
    for (;;) {
      int lvl = binop_level(peek());
      if (lvl < min_level) break;
      Token op = next();
      ExprPtr rhs = parse_binary(lvl + 1);
      Expr e;
      e.k = Expr::K::Binary;
      e.name = op.kind == Tok::Star ? "*" : op.text;
      e.a = lhs;
      e.b = rhs;
      e.span = op.span;
      lhs = mk_expr(std::move(e));
    }
    return lhs;
  }

  ExprPtr parse_expr() { return parse_binary(0); }

  // --- statements ---

  // parses `f(a, b)` after the callee identifier was consumed
  CallInfo parse_call_args(const std::string& callee) {
    CallInfo c;
    c.callee = callee;
    expect(Tok::LParen, "(");
    if (peek().kind != Tok::RParen) {
      c.args.push_back(parse_expr());
      while (accept(Tok::Comma)) c.args.push_back(parse_expr());
    }
    expect(Tok::RParen, ")");
    return c;
  }

  bool call_starts_here() const {
    return peek().kind == Tok::Ident && peek(1).kind == Tok::LParen &&
           peek().text != "sizeof";
  }

  StmtPtr mk_stmt(Stmt s) { return std::make_shared<Stmt>(std::move(s)); }

  StmtPtr parse_statement() {
    const Token& t = peek();
    // pending ghost-argument attributes for a following call
    std::vector<std::pair<std::string, std::string>> ghost_args;
    while (peek().kind == Tok::Attribute &&
           (peek().attr_name == "argument" || peek().attr_name == "assert" ||
            peek().attr_name == "proof")) {
      const Token& a = peek();
      if (a.attr_name == "assert") {
        Stmt s;
        s.k = Stmt::K::Assert;
        s.text = a.attr_payload;
        s.span = a.span;
        ++p;
        accept(Tok::Semi);
        if (!ghost_args.empty()) fail("[[argument]] must precede a call statement");
        return mk_stmt(std::move(s));
      }
      if (a.attr_name == "proof") {
        Stmt s;
        s.k = Stmt::K::ProofBlock;
        s.text = a.attr_payload;
        s.span = a.span;
        ++p;
        accept(Tok::Semi);
        if (!ghost_args.empty()) fail("[[argument]] must precede a call statement");
        return mk_stmt(std::move(s));
      }
      // argument binding: payload `name = term`
      std::string payload = a.attr_payload;
      // strip surrounding backticks if present
      size_t b1 = payload.find('`');
      if (b1 != std::string::npos) {
        size_t b2 = payload.rfind('`');
        payload = payload.substr(b1 + 1, b2 - b1 - 1);
      }
      size_t eq = payload.find('=');
      if (eq == std::string::npos) fail("[[argument]] payload must be `name = term`");
      std::string name = payload.substr(0, eq);
      name.erase(0, name.find_first_not_of(" \t"));
      name.erase(name.find_last_not_of(" \t") + 1);
      ghost_args.emplace_back(name, payload.substr(eq + 1));
      ++p;
    }

    if (peek().kind == Tok::ProofSugar) {
      Stmt s;
      s.k = Stmt::K::ProofBlock;
      s.text = peek().text;
      s.span = peek().span;
      ++p;
      return mk_stmt(std::move(s));
    }

    if (!ghost_args.empty() && !call_starts_here() && !type_starts_here())
      fail("[[argument]] must precede a call statement");

    if (peek().kind == Tok::Ident && kUnsupportedStmts.count(peek().text))
      fail("unsupported statement: " + peek().text);

    if (accept_ident("if")) {
      Stmt s;
      s.k = Stmt::K::If;
      s.span = t.span;
      expect(Tok::LParen, "(");
      s.expr = parse_expr();
      expect(Tok::RParen, ")");
      s.body = parse_block_or_single();
      if (accept_ident("else")) {
        if (peek().kind == Tok::Ident && peek().text == "if") {
          s.else_body.push_back(parse_statement());
        } else {
          s.else_body = parse_block_or_single();
        }
      }
      return mk_stmt(std::move(s));
    }
    if (accept_ident("while")) {
      Stmt s;
      s.k = Stmt::K::While;
      s.span = t.span;
      expect(Tok::LParen, "(");
      s.expr = parse_expr();
      expect(Tok::RParen, ")");
      if (peek().kind == Tok::Attribute && peek().attr_name == "invariant") {
        s.text = peek().attr_payload;
        ++p;
      } else {
        throw ParseError("while loop requires an [[invariant]] attribute (" +
                             t.span.file + ")",
                         t.span.line, t.span.col);
      }
      s.body = parse_block_or_single();
      return mk_stmt(std::move(s));
    }
    if (accept_ident("break")) {
      expect(Tok::Semi, ";");
      Stmt s;
      s.k = Stmt::K::Break;
      s.span = t.span;
      return mk_stmt(std::move(s));
    }
    if (accept_ident("continue")) {
      expect(Tok::Semi, ";");
      Stmt s;
      s.k = Stmt::K::Continue;
      s.span = t.span;
      return mk_stmt(std::move(s));
    }
    if (accept_ident("return")) {
      Stmt s;
      s.k = Stmt::K::Return;
      s.span = t.span;
      if (!accept(Tok::Semi)) {
        if (call_starts_here()) {
          std::string callee = next().text;
          s.call = parse_call_args(callee);
          s.call->ghost_args = std::move(ghost_args);
          ghost_args.clear();
        } else {
          s.expr = parse_expr();
        }
        expect(Tok::Semi, ";");
      }
      return mk_stmt(std::move(s));
    }
    if (type_starts_here()) {
      Stmt s;
      s.k = Stmt::K::Decl;
      s.span = t.span;
      s.ctype = parse_type();
      if (peek().kind != Tok::Ident) fail("expected a variable name");
      s.name = next().text;
      if (accept(Tok::Assign)) {
        if (call_starts_here()) {
          std::string callee = next().text;
          s.call = parse_call_args(callee);
          s.call->ghost_args = std::move(ghost_args);
          ghost_args.clear();
        } else {
          s.expr = parse_expr();
        }
      }
      expect(Tok::Semi, ";");
      return mk_stmt(std::move(s));
    }
    // assignment / store / call / bare expression
    if (call_starts_here()) {
      // could still be an assignment rhs below; a bare call statement
      std::string callee = peek().text;
      // lookahead: ident '(' ... `)` then ';' means a call statement
      // (assignments to calls are handled in the '=' branch)
      size_t save = p;
      ++p;
      CallInfo c = parse_call_args(callee);
      if (accept(Tok::Semi)) {
        Stmt s;
        s.k = Stmt::K::ExprStmt;
        s.call = std::move(c);
        s.call->ghost_args = std::move(ghost_args);
        s.span = t.span;
        return mk_stmt(std::move(s));
      }
      p = save;  // fall through to expression/assignment parsing
    }
    ExprPtr lhs = parse_unary();
    if (accept(Tok::Assign)) {
      Stmt s;
      s.span = t.span;
      if (lhs->k == Expr::K::Var) {
        s.k = Stmt::K::Assign;
        s.name = lhs->name;
      } else if (lhs->k == Expr::K::Unary && lhs->name == "*") {
        s.k = Stmt::K::Store;
        s.addr = lhs->a;
      } else if (lhs->k == Expr::K::Index) {
        // a[i] = e  is  *(a + i) = e
        s.k = Stmt::K::Store;
        Expr add;
        add.k = Expr::K::Binary;
        add.name = "+";
        add.a = lhs->a;
        add.b = lhs->b;
        add.span = lhs->span;
        s.addr = mk_expr(std::move(add));
      } else {
        fail("unsupported assignment target");
      }
      if (call_starts_here()) {
        std::string callee = next().text;
        s.call = parse_call_args(callee);
        s.call->ghost_args = std::move(ghost_args);
        ghost_args.clear();
        if (s.k != Stmt::K::Assign) fail("calls may only be assigned to variables");
      } else {
        s.expr = parse_expr();
      }
      expect(Tok::Semi, ";");
      return mk_stmt(std::move(s));
    }
    if (!ghost_args.empty()) fail("[[argument]] must precede a call statement");
    Stmt s;
    s.k = Stmt::K::ExprStmt;
    s.expr = lhs;
    s.span = t.span;
    expect(Tok::Semi, ";");
    return mk_stmt(std::move(s));
  }

  std::vector<StmtPtr> parse_block_or_single() {
    if (accept(Tok::LBrace)) {
      std::vector<StmtPtr> out;
      while (!accept(Tok::RBrace)) {
        if (peek().kind == Tok::End) fail("unterminated block");
        out.push_back(parse_statement());
      }
      return out;
    }
    return {parse_statement()};
  }

  // --- top level ---

  CProgram parse_unit() {
    CProgram prog;
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Attribute && peek().attr_name == "proof") {
        prog.global_proof_blocks.emplace_back(peek().attr_payload, peek().span);
        ++p;
        accept(Tok::Semi);
        continue;
      }
      if (peek().kind == Tok::ProofSugar) {
        prog.global_proof_blocks.emplace_back(peek().text, peek().span);
        ++p;
        accept(Tok::Semi);
        continue;
      }
      bool is_extern = accept_ident("extern");
      if (!type_starts_here()) fail("expected a declaration");
      Span sp = peek().span;
      CType ty = parse_type();
      if (peek().kind != Tok::Ident) fail("expected a name");
      std::string name = next().text;
      if (peek().kind == Tok::LParen) {
        prog.functions.push_back(parse_function_rest(name, ty, sp, is_extern));
        continue;
      }
      // global variable
      if (ty.k == CType::K::Void) fail("global variables cannot have void type");
      expect(Tok::Semi, ";");
      prog.globals.push_back({name, ty, sp});
    }
    return prog;
  }

  FuncDef parse_function_rest(const std::string& name, CType ret, Span sp, bool is_extern) {
    FuncDef f;
    f.name = name;
    f.return_type = ret;
    f.span = sp;
    expect(Tok::LParen, "(");
    if (!accept(Tok::RParen)) {
      if (peek().kind == Tok::Ident && peek().text == "void" && peek(1).kind == Tok::RParen) {
        p += 2;
      } else {
        for (;;) {
          CType pty = parse_type();
          if (peek().kind != Tok::Ident) fail("expected parameter name");
          std::string pname = next().text;
          f.params.emplace_back(pname, pty);
          if (accept(Tok::RParen)) break;
          expect(Tok::Comma, ",");
        }
      }
    }
    // attributes
    while (peek().kind == Tok::Attribute) {
      const Token& a = peek();
      auto strip_ticks = [](std::string s) {
        size_t b1 = s.find('`');
        if (b1 != std::string::npos) {
          size_t b2 = s.rfind('`');
          s = s.substr(b1 + 1, b2 - b1 - 1);
        }
        return s;
      };
      if (a.attr_name == "require") {
        f.require_text = a.attr_payload;
      } else if (a.attr_name == "ensure") {
        f.ensure_text = a.attr_payload;
      } else if (a.attr_name == "parameter") {
        f.ghost_params.push_back(strip_ticks(a.attr_payload));
      } else {
        fail("unexpected attribute [[" + a.text + "]] on function " + name);
      }
      ++p;
    }
    if (accept(Tok::Semi)) {
      f.is_declaration = true;
      return f;
    }
    expect(Tok::LBrace, "{");
    while (!accept(Tok::RBrace)) {
      if (peek().kind == Tok::End) fail("unterminated function body");
      f.body.push_back(parse_statement());
    }
    (void)is_extern;
    return f;
  }
};

}  // namespace

CProgram parse_program(const std::string& source, const std::string& filename,
                       const std::vector<std::string>& include_paths) {
  std::vector<SourceLine> lines;
  std::set<std::string> visited;
  preprocess(source, filename, include_paths, visited, lines);
  Parser parser(lines);
  return parser.parse_unit();
}

CProgram parse_file(const std::string& path, const std::vector<std::string>& include_paths) {
  auto content = read_file(path);
  if (!content) throw Error("cannot read file: " + path);
  return parse_program(*content, path, include_paths);
}

// ---------------------------------------------------------------------------
// Slicing
// ---------------------------------------------------------------------------

namespace {

void flatten_stmts(const std::vector<StmtPtr>& stmts, std::vector<EngineItem>& out);

void flatten_one(const Stmt& s, std::vector<EngineItem>& out) {
  auto push = [&](EngineItem::K k) { out.push_back({k, &s, s.span}); };
  switch (s.k) {
    case Stmt::K::Decl: push(EngineItem::K::Decl); return;
    case Stmt::K::Assign: push(EngineItem::K::Assign); return;
    case Stmt::K::Store: push(EngineItem::K::Store); return;
    case Stmt::K::ExprStmt:
      push(s.call ? EngineItem::K::Call : EngineItem::K::ExprStmt);
      return;
    case Stmt::K::Return: push(EngineItem::K::Return); return;
    case Stmt::K::Break: push(EngineItem::K::Break); return;
    case Stmt::K::Continue: push(EngineItem::K::Continue); return;
    case Stmt::K::Assert: push(EngineItem::K::Assert); return;
    case Stmt::K::ProofBlock: push(EngineItem::K::ProofMark); return;
    case Stmt::K::If:
      push(EngineItem::K::IfOpen);
      flatten_stmts(s.body, out);
      push(EngineItem::K::IfElse);
      flatten_stmts(s.else_body, out);
      push(EngineItem::K::IfClose);
      return;
    case Stmt::K::While:
      push(EngineItem::K::LoopOpen);
      flatten_stmts(s.body, out);
      push(EngineItem::K::LoopClose);
      return;
  }
}

void flatten_stmts(const std::vector<StmtPtr>& stmts, std::vector<EngineItem>& out) {
  for (const auto& s : stmts) {
    if (s->k == Stmt::K::ProofBlock) {
      out.push_back({EngineItem::K::ProofMark, s.get(), s->span});
      continue;
    }
    flatten_one(*s, out);
  }
}

}  // namespace

SlicedFunction slice_segments(const FuncDef& f) {
  std::vector<EngineItem> items;
  flatten_stmts(f.body, items);
  items.push_back({EngineItem::K::FuncEnd, nullptr, f.span});

  SlicedFunction out;
  Segment cur;
  cur.function = f.name;
  int loop_depth = 0;
  std::vector<std::string> scope;
  for (const auto& p : f.params) scope.push_back(p.first);
  cur.loop_depth_at_start = 0;
  cur.vars_in_scope_at_start = scope;
  for (const auto& item : items) {
    if (item.k == EngineItem::K::ProofMark) {
      out.segments.push_back(std::move(cur));
      out.proof_blocks.emplace_back(item.stmt->text, item.span);
      cur = Segment{};
      cur.function = f.name;
      cur.loop_depth_at_start = loop_depth;
      cur.vars_in_scope_at_start = scope;
      continue;
    }
    if (item.k == EngineItem::K::LoopOpen) ++loop_depth;
    if (item.k == EngineItem::K::LoopClose) --loop_depth;
    if (item.k == EngineItem::K::Decl && item.stmt) scope.push_back(item.stmt->name);
    cur.items.push_back(item);
  }
  out.segments.push_back(std::move(cur));
  return out;
}

ProofProgram assemble_operational_program(const CProgram& p) {
  ProofProgram out;
  out.global_blocks = p.global_proof_blocks;
  for (const auto& f : p.functions) {
    if (f.is_declaration) continue;
    FunctionDriver driver;
    driver.function = &f;
    SlicedFunction sliced = slice_segments(f);
    driver.segments = std::move(sliced.segments);
    for (size_t i = 0; i < driver.segments.size(); ++i) {
      DriverStep feed;
      feed.k = DriverStep::K::Feed;
      feed.segment_index = i;
      driver.steps.push_back(feed);
      if (i < sliced.proof_blocks.size()) {
        DriverStep block;
        block.k = DriverStep::K::Block;
        block.text = sliced.proof_blocks[i].first;
        block.span = sliced.proof_blocks[i].second;
        driver.steps.push_back(std::move(block));
      }
    }
    out.drivers.push_back(std::move(driver));
  }
  return out;
}

}  // namespace cstar::cfront
