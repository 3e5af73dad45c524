// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0
//
// The proof-supporting runtime: a tree-walking interpreter for the C-like
// proof language, wired to the kernel, the separation-logic theory, and the
// symbolic-execution engine. Global proof blocks are file-scoped; all local
// blocks of one function share one scope; braces open child scopes.

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "cstar/symexec.hpp"

namespace cstar::proofrt {

struct PFunc;

struct PValue {
  enum class K { Null, Unit, Int, Str, TermV, ThmV, Array, Closure, Builtin } k = K::Unit;
  long long i = 0;
  std::string s;
  Term term;
  Theorem thm;
  std::shared_ptr<std::vector<PValue>> arr;
  std::shared_ptr<const PFunc> fn;
  std::shared_ptr<struct PEnv> closure;

  static PValue unit() { return {}; }
  static PValue null() {
    PValue v;
    v.k = K::Null;
    return v;
  }
  static PValue of_int(long long x) {
    PValue v;
    v.k = K::Int;
    v.i = x;
    return v;
  }
  static PValue of_term(Term t) {
    PValue v;
    v.k = K::TermV;
    v.term = std::move(t);
    return v;
  }
  static PValue of_thm(Theorem t) {
    PValue v;
    v.k = K::ThmV;
    v.thm = std::move(t);
    return v;
  }
  std::string kind_name() const;
};

struct PEnv {
  std::map<std::string, PValue> vars;
  std::shared_ptr<PEnv> parent;

  PValue* find(const std::string& name);
  void declare(const std::string& name, PValue v);
};

struct RunReport {
  struct PerFunction {
    std::string name;
    int segments = 0;
    int proof_blocks = 0;
  };
  std::vector<PerFunction> functions;
  std::vector<std::string> diagnostics;
};

// Result of one assert_prove call in a residual proof program.
struct ProvedGoal {
  Term goal;
  std::set<std::string> tags;
};

class Interp {
 public:
  Interp(engine::RunContext& ctx);

  // Runs the assembled operational proof program: global blocks first, then
  // each function driver, alternating segment feeds and local proof blocks.
  RunReport run_proof_program(const cfront::ProofProgram& prog);

  // Runs a residual proof file (global proof blocks only); assert_prove
  // calls are recorded and matched against the run's verification
  // conditions by the driver.
  void run_residual(const cfront::CProgram& proofs);

  const std::vector<ProvedGoal>& proved_goals() const { return proved_; }

  // Executes one proof block in the given scope (used by the drivers and by
  // tests).
  void exec_block(const std::string& text, const cfront::Span& span,
                  std::shared_ptr<PEnv> scope);

  std::shared_ptr<PEnv> file_scope() { return file_scope_; }
  void set_engine(engine::Engine* e) { engine_ = e; }
  void set_residual_mode(bool b) { residual_mode_ = b; }

  // Payload evaluator for the engine: quotation literal or proof expression.
  Term eval_attribute_payload(const std::string& payload, const quote::SyntaxEnv& base,
                              bool hprop);

 private:
  friend struct EvalVisitor;
  PValue call_builtin(const std::string& name, std::vector<PValue>& args,
                      const cfront::Span& span);
  PValue define_predicate(const std::string& equation, const cfront::Span& span);
  Term quote_term(const std::string& text, const cfront::Span& span, bool hprop);
  quote::SyntaxEnv quote_env() const;

  engine::RunContext& ctx_;
  sep::Theory& th_;
  std::shared_ptr<PEnv> file_scope_;
  std::shared_ptr<PEnv> cur_scope_;
  engine::Engine* engine_ = nullptr;
  bool residual_mode_ = false;
  std::vector<ProvedGoal> proved_;
};

}  // namespace cstar::proofrt
