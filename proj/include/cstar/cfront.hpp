// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0
//
// Frontend for the annotated C subset (.cst files): lexer, parser, include
// resolution, slicing of function bodies into segments separated by proof
// blocks, and assembly of the operational proof program. Attribute payloads
// (quotations, proof code) are kept as raw text and parsed later against the
// correct scope.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cstar/bigint.hpp"
#include "cstar/errors.hpp"

namespace cstar::cfront {

struct Span {
  std::string file;
  int line = 0;
  int col = 0;
};

// --- C types of the subset ---

struct CType {
  enum class K { Void, Int, Char, UChar, Ptr } k = K::Int;
  std::shared_ptr<CType> pointee;  // for Ptr; null pointee = opaque (struct*)

  static CType void_t() { return {K::Void, nullptr}; }
  static CType int_t() { return {K::Int, nullptr}; }
  static CType char_t() { return {K::Char, nullptr}; }
  static CType uchar_t() { return {K::UChar, nullptr}; }
  static CType ptr_to(CType t) { return {K::Ptr, std::make_shared<CType>(std::move(t))}; }
  static CType opaque_ptr() { return {K::Ptr, nullptr}; }

  bool is_ptr() const { return k == K::Ptr; }
  bool operator==(const CType& o) const;
  std::string to_string() const;
};

// --- expressions ---

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  enum class K {
    IntLit,    // value
    Var,       // name
    Unary,     // op in { -, !, &, * }, a
    Binary,    // op, a, b
    Cast,      // ctype, a
    Index,     // a[b]
    SizeofType // ctype
  } k;
  BigInt value;
  std::string name;  // Var name or operator spelling
  CType ctype;       // Cast, SizeofType
  ExprPtr a, b;
  Span span;
};

// --- statements ---

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct CallInfo {
  std::string callee;
  std::vector<ExprPtr> args;
  // ghost-argument bindings from [[argument(`name = term`)]], raw term text
  std::vector<std::pair<std::string, std::string>> ghost_args;
};

struct Stmt {
  enum class K {
    Decl,        // ctype name [= init]; init may be a call
    Assign,      // name = expr  (or name = call)
    Store,       // *addr = expr
    ExprStmt,    // expr;   (plain expression, or a bare call)
    If,          // cond, then_body, else_body
    While,       // cond, invariant text, body
    Break,
    Continue,
    Return,      // optional expr or call
    Assert,      // raw payload text
    ProofBlock,  // raw proof-code text
  } k;
  CType ctype;                      // Decl
  std::string name;                 // Decl/Assign target
  ExprPtr expr;                     // initializer / rhs / condition / return / store rhs
  ExprPtr addr;                     // Store target (the dereferenced address expression)
  std::optional<CallInfo> call;     // Decl/Assign/ExprStmt/Return via call
  std::vector<StmtPtr> body;        // If-then / While body
  std::vector<StmtPtr> else_body;   // If-else
  std::string text;                 // invariant / assert / proof payload
  Span span;
};

// --- top-level ---

struct FuncDef {
  std::string name;
  CType return_type;
  std::vector<std::pair<std::string, CType>> params;
  std::vector<std::string> ghost_params;  // raw `name:type` payloads
  std::optional<std::string> require_text;
  std::optional<std::string> ensure_text;
  std::vector<StmtPtr> body;
  bool is_declaration = false;  // extern / forward declaration (no body)
  Span span;
};

struct GlobalVar {
  std::string name;
  CType ctype;
  Span span;
};

struct CProgram {
  std::vector<GlobalVar> globals;
  std::vector<FuncDef> functions;                      // in source order
  std::vector<std::pair<std::string, Span>> global_proof_blocks;
};

// Parses a translation unit, resolving #include "..." textually against the
// include paths (the file's own directory is searched first).
CProgram parse_program(const std::string& source, const std::string& filename,
                       const std::vector<std::string>& include_paths = {});
CProgram parse_file(const std::string& path, const std::vector<std::string>& include_paths = {});

// --- slicing: flattened engine items ---

// A function body flattens to a stream of items; proof blocks split the
// stream into segments. Structural markers keep if/loop nesting explicit so
// a segment can start or end inside a branch or a loop body.
struct EngineItem {
  enum class K {
    Decl, Assign, Store, ExprStmt, Call, Return,
    IfOpen, IfElse, IfClose,
    LoopOpen, LoopClose,
    Break, Continue,
    Assert,
    FuncEnd,
    ProofMark,  // slicing sentinel, never reaches the engine
  } k;
  const Stmt* stmt = nullptr;  // owning CProgram must outlive the items
  Span span;
};

struct Segment {
  std::vector<EngineItem> items;
  std::string function;
  int loop_depth_at_start = 0;
  std::vector<std::string> vars_in_scope_at_start;
};

// Alternating segments and proof-block texts, in source order. The first
// element is always a segment (possibly empty).
struct SlicedFunction {
  std::vector<Segment> segments;
  std::vector<std::pair<std::string, Span>> proof_blocks;  // between segments
};

SlicedFunction slice_segments(const FuncDef& f);

// --- the operational proof program ---

struct DriverStep {
  enum class K { Feed, Block } k;
  size_t segment_index = 0;        // Feed
  std::string text;                // Block
  Span span;
};

struct FunctionDriver {
  const FuncDef* function = nullptr;
  std::vector<Segment> segments;
  std::vector<DriverStep> steps;
};

struct ProofProgram {
  std::vector<std::pair<std::string, Span>> global_blocks;
  std::vector<FunctionDriver> drivers;  // one per function definition, source order
};

ProofProgram assemble_operational_program(const CProgram& p);

}  // namespace cstar::cfront
