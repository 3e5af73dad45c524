// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0
//
// The separation-logic theory: object-logic constants, tagged axioms
// (structural rules, pure/fact laws, the array and list lemma library), and
// builders for the commonly used terms. Every tagged axiom is validated
// against the concrete-heap evaluator in the test suites; the tags keep the
// trusted base visible in theorem provenance.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "cstar/derived.hpp"
#include "cstar/kernel.hpp"

namespace cstar::sep {

class Theory {
 public:
  explicit Theory(Kernel& k) : k_(&k) {}

  Kernel& kernel() const { return *k_; }

  Theorem axiom(const std::string& tag) const;
  // Axiom or lemma instantiated at the given arguments (the accessor behind
  // proof-code calls like undef_array_at_select_first(a, ty, n)).
  Theorem lemma(const std::string& name, const std::vector<Term>& args) const;
  bool has_lemma(const std::string& name) const;

  // Registers a user predicate from its defining equation. Non-recursive
  // equations go through the kernel's definitional mechanism (no new trust);
  // recursive ones are registered as a tagged axiom "def-<name>". Both get
  // <name>_unfold / <name>_fold lemma accessors.
  Theorem define_predicate(const std::string& name, const std::vector<Term>& params,
                           const Term& body);

  const std::map<std::string, Theorem>& user_definitions() const { return user_defs_; }
  // Tags registered by register_theory, in registration order (the semantic
  // oracle suite iterates these).
  const std::vector<std::string>& theory_axiom_tags() const { return tags_; }

  // --- term builders ---
  Term emp() const;
  Term ctype_const(const std::string& name) const;  // Tchar, Tuchar, Tint, Tptr
  Term mk_int(const BigInt& v) const;
  Term mk_sep(const Term& a, const Term& b) const;
  Term mk_sep_list(const std::vector<Term>& conjuncts) const;  // emp if empty, right-assoc
  Term mk_fact(const Term& p) const;
  Term mk_pure(const Term& p) const;
  Term mk_hand(const Term& a, const Term& b) const;
  Term mk_entail(const Term& lhs, const Term& rhs) const;
  Term mk_bientail(const Term& lhs, const Term& rhs) const;  // equality at hprop
  Term mk_data_at(const Term& addr, const Term& cty, const Term& value) const;
  Term mk_undef_data_at(const Term& addr, const Term& cty) const;
  Term mk_hexists(const Term& var, const Term& body) const;
  Term mk_sizeof(const Term& cty) const;
  Term mk_add(const Term& a, const Term& b) const;
  Term mk_sub(const Term& a, const Term& b) const;
  Term mk_mul(const Term& a, const Term& b) const;

  bool is_sep(const Term& t) const { return is_binary(t, "**"); }
  bool is_fact(const Term& t) const;
  bool is_entail(const Term& t) const { return is_binary(t, "|--"); }
  bool is_bientail(const Term& t) const { return is_eq(t) && eq_lhs(t).type() == hprop_ty(); }
  bool is_hexists(const Term& t) const;

  // Splits a right-or-left nested `**` into its conjunct list.
  std::vector<Term> conjuncts(const Term& t) const;

 private:
  friend Theory register_theory(Kernel& k);
  Kernel* k_;
  std::vector<std::string> tags_;
  std::map<std::string, Theorem> user_defs_;  // name -> forall-closed equation
};

// Registers the base logic (if absent), all constants, definitions, and
// tagged axioms. Throws RegistryError if any name is already taken.
Theory register_theory(Kernel& k);

}  // namespace cstar::sep
