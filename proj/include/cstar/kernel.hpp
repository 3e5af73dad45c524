// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cstar/bigint.hpp"
#include "cstar/errors.hpp"

namespace cstar {

// ---------------------------------------------------------------------------
// Types of the object logic: simply typed with named constructors.
// Built-in constructors: bool/0, fun/2, integer/0, hprop/0, ctype/0, list/1.
// ---------------------------------------------------------------------------

class HolType {
 public:
  enum class Kind { Var, App };

  static HolType var(std::string name);
  static HolType app(std::string ctor, std::vector<HolType> args);

  Kind kind() const;
  const std::string& name() const;  // variable name or constructor name
  const std::vector<HolType>& args() const;

  bool operator==(const HolType& other) const;
  bool operator!=(const HolType& other) const { return !(*this == other); }

  std::string to_string() const;

  bool is_fun() const;
  const HolType& fun_from() const;
  const HolType& fun_to() const;

 private:
  struct Node;
  std::shared_ptr<const Node> node_;
};

HolType bool_ty();
HolType integer_ty();
HolType hprop_ty();
HolType ctype_ty();
HolType list_ty(HolType elem);
HolType fun_ty(HolType from, HolType to);

using TypeSubst = std::vector<std::pair<HolType, HolType>>;  // tyvar -> type

HolType apply_type_subst(const TypeSubst& subst, const HolType& ty);
// One-way matching: instantiate pattern's type variables so it equals
// concrete. Extends `subst`; returns false on clash.
bool match_type(const HolType& pattern, const HolType& concrete, TypeSubst& subst);
void collect_tyvars(const HolType& ty, std::vector<HolType>& out);

// ---------------------------------------------------------------------------
// Terms: Var | Const | App | Abs. Well-typed by construction; Consts only
// come from a Kernel, which checks the occurrence against the registered
// most-general type.
// ---------------------------------------------------------------------------

class Term {
 public:
  enum class Kind { Var, Const, App, Abs };

  Term() = default;  // empty handle; valid() is false
  bool valid() const { return node_ != nullptr; }

  Kind kind() const;
  const HolType& type() const;
  const std::string& name() const;  // Var, Const
  const Term& fn() const;           // App
  const Term& arg() const;          // App
  const Term& bound_var() const;    // Abs (a Var term)
  const Term& body() const;         // Abs

  bool is_var() const { return valid() && kind() == Kind::Var; }
  bool is_const() const { return valid() && kind() == Kind::Const; }
  bool is_app() const { return valid() && kind() == Kind::App; }
  bool is_abs() const { return valid() && kind() == Kind::Abs; }

  // Structural equality including bound-variable names.
  bool operator==(const Term& other) const;
  bool operator!=(const Term& other) const { return !(*this == other); }

 private:
  struct Node;
  std::shared_ptr<const Node> node_;
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  friend Term mk_var(std::string, HolType);
  friend Term mk_app(const Term&, const Term&);
  friend Term mk_abs(const Term&, const Term&);
  friend Term subst_term_types(const TypeSubst&, const Term&);
  friend Term mk_int_literal(const BigInt&);
  friend Term mk_address_const(const std::string&);
  friend class Kernel;
};

Term mk_var(std::string name, HolType ty);
Term mk_app(const Term& f, const Term& x);   // throws TypeError on mismatch
Term mk_abs(const Term& var, const Term& body);
Term mk_app(const Term& f, const std::vector<Term>& args);

// Integer literals `&n` and program-variable addresses `&"x"` are implicitly
// registered constant families of type integer; no registry entry is needed.
bool is_literal_const_name(const std::string& name);
Term mk_int_literal(const BigInt& n);  // n >= 0; negative literals are --(&n)
Term mk_address_const(const std::string& var_name);
bool is_int_literal(const Term& t);
std::optional<BigInt> dest_int_literal(const Term& t);  // handles --(&n)
bool is_address_const(const Term& t);

// Total structural order (for canonical sorting and map keys).
int term_compare(const Term& a, const Term& b);
struct TermLess {
  bool operator()(const Term& a, const Term& b) const { return term_compare(a, b) < 0; }
};

bool alpha_eq(const Term& a, const Term& b);

std::vector<Term> free_vars(const Term& t);
bool is_free_in(const Term& var, const Term& t);
bool is_closed(const Term& t);

using TermSubst = std::vector<std::pair<Term, Term>>;  // var -> term

// Capture-avoiding substitution; bound variables are renamed when needed.
Term subst_term(const TermSubst& subst, const Term& t);
Term subst_term_types(const TypeSubst& subst, const Term& t);

// Strip an application spine: returns head, fills args in order.
Term strip_app(const Term& t, std::vector<Term>& args);

// Destructuring helpers for the equational fragment. `=` is the polymorphic
// equality constant; `<=>`, `==`, and hprop bi-entailment `-|-` are its
// instances at bool, integer, and hprop.
bool is_eq(const Term& t);
Term eq_lhs(const Term& t);
Term eq_rhs(const Term& t);
bool is_binary(const Term& t, const std::string& const_name);
Term binary_lhs(const Term& t);
Term binary_rhs(const Term& t);

// Right-hand side of an implication, entailment, or equality.
Term consequent(const Term& t);
Term antecedent(const Term& t);

// ---------------------------------------------------------------------------
// Theorems: hypotheses |- conclusion, plus the set of trusted axiom tags the
// derivation relies on. Only a Kernel can construct one.
// ---------------------------------------------------------------------------

class Theorem {
 public:
  Theorem() = default;
  bool valid() const { return concl_.valid(); }

  const std::vector<Term>& hypotheses() const { return hyps_; }
  const Term& conclusion() const { return concl_; }
  const std::set<std::string>& axioms() const { return axioms_; }

 private:
  std::vector<Term> hyps_;  // alpha-deduplicated, sorted by term_compare
  Term concl_;
  std::set<std::string> axioms_;
  friend class Kernel;
};

// ---------------------------------------------------------------------------
// The kernel: registry of type constructors, constants, definitions, and
// axioms, plus the primitive inference rules. Everything a Theorem can ever
// say goes through this class.
// ---------------------------------------------------------------------------

class Kernel {
 public:
  Kernel();
  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  // --- registry ---
  void new_type(const std::string& name, size_t arity);
  std::optional<size_t> type_arity(const std::string& name) const;
  void new_constant(const std::string& name, const HolType& most_general);
  bool has_constant(const std::string& name) const;
  const HolType& constant_type(const std::string& name) const;

  // Constant occurrence at an instance of its registered type.
  Term mk_const(const std::string& name, const HolType& ty_instance) const;
  // Constant at its registered most-general type.
  Term constant(const std::string& name) const;

  // --- primitive rules ---
  Theorem refl(const Term& t) const;                       // |- t = t
  Theorem trans(const Theorem& ab, const Theorem& bc) const;
  Theorem symm(const Theorem& th) const;
  Theorem assume(const Term& t) const;                     // t |- t
  Theorem eq_mp(const Theorem& eq, const Theorem& th) const;
  Theorem deduct_antisym(const Theorem& a, const Theorem& b) const;
  Theorem abs_rule(const Term& var, const Theorem& th) const;
  Theorem mk_comb_rule(const Theorem& fth, const Theorem& xth) const;
  Theorem beta(const Term& redex) const;                   // |- (\x. b) a = b[a/x]
  Theorem inst(const TermSubst& subst, const Theorem& th) const;
  Theorem inst_type(const TypeSubst& subst, const Theorem& th) const;

  // --- extension mechanisms ---
  // Equation `c = body` (or `c x1 .. xn = body` which is curried into an
  // abstraction); c a fresh name, body closed. Registers the constant and
  // returns the definitional theorem with an empty axiom set.
  Theorem new_basic_definition(const std::string& name, const Term& equation);
  // |- statement with axiom set {tag}; recorded in the registry.
  Theorem new_axiom(const std::string& tag, const Term& statement);
  // Oracle hook: |- statement carrying `tag` without registering a named
  // axiom. Used by decision procedures; the tag lands in every consumer's
  // provenance set, which is what keeps the trust boundary visible.
  Theorem oracle_theorem(const std::string& tag, const Term& statement) const;

  std::optional<Theorem> find_axiom(const std::string& tag) const;
  std::optional<Theorem> find_definition(const std::string& name) const;
  std::vector<std::string> axiom_tags() const;

  Term mk_eq(const Term& lhs, const Term& rhs) const;

 private:
  void check_registered_type(const HolType& ty) const;
  Theorem make(std::vector<Term> hyps, Term concl, std::set<std::string> axioms) const;

  std::map<std::string, size_t> type_arities_;
  std::map<std::string, HolType> constants_;
  std::map<std::string, Theorem> definitions_;
  std::map<std::string, Theorem> axioms_;
};

// Union of hypothesis lists, alpha-deduplicated and sorted.
std::vector<Term> merge_hyps(const std::vector<Term>& a, const std::vector<Term>& b);

}  // namespace cstar
