// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0
//
// Derived separation-logic rules. Everything here composes kernel
// primitives and the registered axioms; nothing mints new trust beyond
// the arith oracle where noted.

#pragma once

#include <optional>

#include "cstar/arith.hpp"
#include "cstar/seplogic.hpp"

namespace cstar::sep {

// --- rewriting ---

// First top-down, leftmost instance of eq's left side replaced, where eq is
// a (possibly forall-quantified) equality. Returns refl(t) when there is no
// match.
Theorem rewrite_once(const Kernel& k, const Theorem& eq, const Term& t);

// Rewrites th's conclusion with each rule repeatedly to a fixpoint
// (replacement bound guards divergence) and transports th across.
Theorem rewrite_rule_list(const Kernel& k, const std::vector<Theorem>& eqs, Theorem th,
                          int bound = 10000);

// --- structural equalities (bi-entailments are equalities at hprop) ---

Theorem hsep_comm_thm(const Theory& th, const Term& t);   // |- !hp. t ** hp -|- hp ** t
Theorem hsep_move_thm(const Theory& th, const Term& t);
// |- !hp1 hp2. hp1 ** (t ** hp2) -|- t ** (hp1 ** hp2)

// |- t -|- canonical(t): existentials outermost (original order), then fact
// conjuncts, then spatial conjuncts, right-associated, emp units removed.
Theorem sep_normalize_thm(const Theory& th, const Term& t);

// |- t -|- target ** rest (rest keeps the remaining conjuncts in order).
Theorem sep_lift_thm(const Theory& th, const Term& target, const Term& t);
// Same, but requires the input to already be right-associated.
Theorem sep_lift_one_thm(const Theory& th, const Term& target, const Term& t);

// |- t1 -|- t2 when the two are reorderings of each other modulo alpha;
// nothing otherwise.
std::optional<Theorem> sep_reorder_thm(const Theory& th, const Term& t1, const Term& t2);

// --- entailment plumbing ---

Theorem entail_refl_thm(const Theory& th, const Term& h);
Theorem entail_of_eq(const Theory& th, const Theorem& eq);
Theorem entail_trans_thm(const Theory& th, const Theorem& ab, const Theorem& bc);
Theorem entail_frame(const Theory& th, const Theorem& ent, const Term& frame);

// |- body[witnesses/binders] |-- target, for target = exists xs. body.
Theorem exists_intro_thm(const Theory& th, const std::vector<Term>& witnesses,
                         const Term& target);

// The four-step local transformation: match transform's left side against
// state conjuncts (modulo arithmetic normal form, bridged by the arith
// oracle), cancel against the untouched frame, discharge the transform's
// premise from the state's facts, and re-wrap existential binders.
// transform concludes L |-- R, L -|- R, or P ==> (either form).
Theorem local_apply_thm(const Theory& th, const Term& state, const Theorem& transform);

// |- state |-- state with every occurrence of old_int replaced by new_int,
// justified by arith from the state's facts.
Theorem arith_subst_thm(const Theory& th, const Term& state, const Term& old_int,
                        const Term& new_int);

// |- state |-- fact(q) ** state', q arith-derivable from the state's facts.
Theorem pure_intro_thm(const Theory& th, const Term& state, const Term& q);

// |- state |-- state minus one fact conjunct equal (modulo arith NF) to
// fact(p).
Theorem sep_drop_fact_thm(const Theory& th, const Term& state, const Term& p);

// |- fact(p) -|- emp, from |- p.
Theorem fact_emp_thm(const Theory& th, const Theorem& proven);

// |- state |-- fact(p) ** state, from |- p.
Theorem fact_intro_thm(const Theory& th, const Term& state, const Theorem& proven);

// |- state -|- state without existential binders that do not occur.
Theorem drop_unused_binders_thm(const Theory& th, const Term& state);

// |- state |-- X ** state, from |- emp |-- X (or emp -|- X).
Theorem sep_intro_thm(const Theory& th, const Term& state, const Theorem& intro);

// |- state |-- target, where target = exists ys. body and, after
// instantiating ys with the witnesses, body's spatial conjuncts are a
// permutation of the state's (modulo arithmetic normal form, bridged by the
// arith oracle) and its facts follow from the state's facts by linear
// arithmetic. State binders are eliminated, target binders introduced.
Theorem sep_match_thm(const Theory& th, const Term& state, const Term& target,
                      const std::vector<Term>& witnesses);

}  // namespace cstar::sep
