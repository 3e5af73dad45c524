// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cstar/kernel.hpp"

namespace cstar::rules {

// Defines the boolean structure on top of the kernel's polymorphic equality:
// T, &&, ==>, ! (universal), ? (existential), F, ~, ||. All are definitional,
// so theorems about them carry no axiom tags.
void bootstrap_base_logic(Kernel& k);

// Term builders over the bootstrapped constants.
Term mk_conj(const Kernel& k, const Term& a, const Term& b);
Term mk_disj(const Kernel& k, const Term& a, const Term& b);
Term mk_imp(const Kernel& k, const Term& a, const Term& b);
Term mk_not(const Kernel& k, const Term& a);
Term mk_forall(const Kernel& k, const Term& var, const Term& body);
Term mk_exists(const Kernel& k, const Term& var, const Term& body);
Term mk_conj_list(const Kernel& k, const std::vector<Term>& ps);  // T if empty

bool is_forall(const Term& t);
bool is_conj(const Term& t);
bool is_imp(const Term& t);
bool is_not(const Term& t);
// Strips nested universal quantifiers; appends the bound variables.
Term strip_forall(const Term& t, std::vector<Term>& vars);

// Standard derived rules over the base logic.
Theorem truth(const Kernel& k);                                       // |- T
Theorem eqt_intro(const Kernel& k, const Theorem& th);                // |- p = T
Theorem eqt_elim(const Kernel& k, const Theorem& th);                 // |- p  from |- p = T
Theorem ap_term(const Kernel& k, const Term& f, const Theorem& th);   // |- f a = f b
Theorem ap_thm(const Kernel& k, const Theorem& th, const Term& x);    // |- f x = g x
Theorem beta_norm_conv(const Kernel& k, const Term& t);               // |- t = beta-nf(t)
Theorem conj(const Kernel& k, const Theorem& a, const Theorem& b);
Theorem conjunct1(const Kernel& k, const Theorem& th);
Theorem conjunct2(const Kernel& k, const Theorem& th);
Theorem mp(const Kernel& k, const Theorem& imp, const Theorem& ant);
Theorem disch(const Kernel& k, const Term& p, const Theorem& th);
Theorem undisch(const Kernel& k, const Theorem& th);
Theorem spec(const Kernel& k, const Theorem& th, const Term& t);
Theorem specialize(const Kernel& k, Theorem th, const std::vector<Term>& args);
Theorem gen(const Kernel& k, const Term& var, const Theorem& th);
// Generalizes the free variables of the conclusion (not free in hypotheses),
// outermost binder = first occurrence in the conclusion.
Theorem gen_all(const Kernel& k, const Theorem& th);
Theorem imp_trans(const Kernel& k, const Theorem& pq, const Theorem& qr);

}  // namespace cstar::rules
