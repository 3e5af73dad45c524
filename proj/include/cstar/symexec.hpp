// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0
//
// Forward symbolic execution over canonical symbolic heaps. The engine
// executes fed segments statement by statement, keeps one maps-to conjunct
// per program variable, auto-discharges trivial entailments (conjunct
// reordering modulo arithmetic normal form plus the linear-arith oracle for
// pure residues), and emits verification conditions for everything else.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cstar/cfront.hpp"
#include "cstar/quote.hpp"
#include "cstar/sep_rules.hpp"
#include "cstar/seplogic.hpp"

namespace cstar::engine {

// Canonical symbolic state: existential binders over pure facts and spatial
// conjuncts. The denotation nests binders outside fact conjuncts followed by
// spatial conjuncts, right-associated.
struct SymHeap {
  std::vector<Term> binders;   // Var terms, outermost first
  std::vector<Term> pures;     // bool terms
  std::vector<Term> spatials;  // hprop terms
};

struct VerificationCondition {
  std::string id;      // vc1, vc2, ... in emission order
  std::string kind;    // assert, invariant-establish, invariant-restore,
                       // postcondition, call-precondition, continue, break,
                       // side-condition
  cfront::Span origin;
  Term goal;           // forall-closed bool term
  bool discharged = false;
};

struct StateLogEntry {
  cfront::Span span;
  std::string state;  // printed denotation, or "unreachable"
};

// Evaluates an attribute payload (a quotation literal or a proof-variable
// reference) in the given base scope. Installed by the proof runtime; the
// default handles bare quotations only.
using PayloadEval =
    std::function<Term(const std::string& payload, const quote::SyntaxEnv& env, bool hprop)>;

struct RunContext {
  sep::Theory* theory = nullptr;
  const cfront::CProgram* program = nullptr;
  PayloadEval eval_payload;  // optional
  std::vector<VerificationCondition> vcs;
  std::vector<StateLogEntry> state_log;
  std::set<std::string> trust;        // axiom tags relied on by proof code
  int auto_discharged = 0;
  int vc_counter = 0;

  VerificationCondition& emit_vc(const std::string& kind, const cfront::Span& origin,
                                 const Term& goal);
};

class Engine {
 public:
  Engine(RunContext& ctx, const cfront::FuncDef& f);

  // Executes one fed segment; engine state persists across feeds.
  void feed(const cfront::Segment& seg);

  // Canonical denotation of the current symbolic heap.
  Term state_term() const;
  bool state_live() const { return current_.has_value(); }

  // Updates the state from |- S |-- S' (or S -|- S'); S must be alpha-equal
  // to the current denotation, hypotheses must be empty.
  void set_state_from(const Theorem& th);

  // Quotation scope at the current program point: parameters and ghost
  // parameters, global initial values, state binders, and the current value
  // of every program variable that has one.
  quote::SyntaxEnv proof_quote_env() const;

  // Machine-checkable canonical-shape and one-conjunct-per-variable check.
  void validate_state() const;

  const cfront::FuncDef& function() const { return func_; }

  // Canonicalization of an hprop term into a symbolic heap (binders hoisted
  // and freshened, facts split on conjunction, emp dropped). Binders only
  // avoid the current state's binders when the result is appended to it
  // rather than replacing it.
  SymHeap canonicalize(const Term& t, bool avoid_current_binders = false) const;
  Term denote(const SymHeap& h) const;

 private:
  struct VarInfo {
    cfront::CType ctype;
    Term addr;
    bool is_global = false;
  };
  struct Typed {
    Term term;
    cfront::CType ctype;
  };
  struct IfFrame {
    std::optional<SymHeap> base;
    Term cond_true, cond_false;
    std::vector<std::optional<SymHeap>> arms;
  };
  struct LoopFrame {
    const cfront::Stmt* stmt = nullptr;
    Term invariant;  // parsed hprop (valid only for live entry)
    std::vector<SymHeap> breaks;
    bool live = false;
  };
  struct Frame {
    enum class K { If, Loop } k;
    IfFrame iff;
    LoopFrame loop;
  };

  void exec_item(const cfront::EngineItem& item);
  void exec_decl(const cfront::Stmt& s);
  void exec_assign(const cfront::Stmt& s);
  void exec_store(const cfront::Stmt& s);
  void exec_call(const cfront::Stmt& s, const cfront::Span& span);
  void exec_return(const cfront::Stmt* s, const cfront::Span& span);
  void exec_return_value(const Term& result, const cfront::Span& span);
  void exec_assert_item(const cfront::Stmt& s);
  // Core assert step: discharge-or-emit for `from`, then (optionally) no
  // state change. Returns true when auto-discharged.
  bool discharge_or_vc(const SymHeap& from, const SymHeap& to, const std::string& kind,
                       const cfront::Span& origin);
  bool try_auto_discharge(const SymHeap& from, const SymHeap& to);

  Typed translate(const cfront::Expr& e);
  Term translate_condition(const cfront::Expr& e);
  Term load_value(const Term& addr, const Term& cty, const cfront::Span& span);
  int find_primitive(const Term& addr) const;  // index into spatials, -1 if none
  Term read_var(const std::string& name, const cfront::Span& span);

  Term logic_ctype(const cfront::CType& t, const cfront::Span& span) const;
  Term fresh_var(const std::string& base);
  std::string fresh_name(const std::string& base) const;

  quote::SyntaxEnv spec_env(bool with_result, const Term& result) const;
  Term eval_payload(const std::string& payload, const quote::SyntaxEnv& env, bool hprop,
                    const cfront::Span& span);
  Term instantiated_require(const cfront::FuncDef& callee,
                            const std::map<std::string, Term>& args,
                            const cfront::Span& span, Term* ensure_out,
                            const Term& result_var);

  void log_state(const cfront::Span& span);
  void side_condition(const Term& cond, const cfront::Span& span);
  void push_scope();
  // removes the innermost scope's locals from the tables and, when a state
  // is given, their maps-to conjuncts from it
  void pop_scope(SymHeap* state, const cfront::Span& span);
  // drops conjuncts for every scope inner to (and including) depth `keep`
  void drop_scopes_down_to(size_t keep, SymHeap& state, const cfront::Span& span);

  RunContext& ctx_;
  const cfront::FuncDef& func_;
  sep::Theory& th_;
  std::optional<SymHeap> current_;
  std::vector<Frame> frames_;
  std::map<std::string, VarInfo> vars_;
  std::vector<std::string> var_order_;
  std::map<std::string, Term> spec_vars_;  // params, ghosts, global initials
  std::vector<std::pair<SymHeap, std::string>> pending_join_;  // state, vc kind
  std::vector<std::vector<std::string>> scopes_;  // block-scoped local names
  bool join_required_ = false;
  bool join_from_break_ = false;
  std::string join_reason_;
  mutable int fresh_counter_ = 0;
};

}  // namespace cstar::engine
