// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0
//
// Arithmetic normal form for integer terms (sums of monomials over atoms,
// constant-folded sizeof) and a validity checker for quantifier-free linear
// integer arithmetic. Validity is decided by negating, converting to DNF,
// and running the Omega test (Fourier-Motzkin with integer tightening, dark
// shadow, and splinter case splits) on each cube.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cstar/kernel.hpp"

namespace cstar::arith {

// C-type byte sizes used when folding sizeof(ctype constant).
std::optional<BigInt> ctype_size(const std::string& ctype_const_name);

// Rebuilds `t` with every integer-typed subterm in arithmetic normal form:
// monomials sorted structurally, constants folded, sizeof of a known ctype
// constant replaced by its byte size. Non-integer structure is preserved.
Term arith_normal_term(const Kernel& k, const Term& t);

// Alpha-equality after arithmetic normalization; the conjunct-matching
// relation used by the engine and by local_apply.
bool match_modulo_arith(const Kernel& k, const Term& a, const Term& b);

enum class Fragment {
  // The documented arith_rule fragment: +, -, literal multiplication,
  // sizeof constants, comparisons, boolean connectives. Nonlinear products,
  // division, and modulus are errors; uninterpreted integer atoms are
  // treated as variables.
  User,
  // Internal use (auto-discharge): additionally abstracts nonlinear and
  // opaque subterms as fresh variables, which is sound for proving validity.
  AbstractOpaque,
};

struct Validity {
  bool valid = false;
  std::string countermodel;  // "x = 1, y = -2" when a small one exists
};

// Throws Error (message "outside linear fragment: ...") in Fragment::User
// mode when the formula leaves the fragment.
Validity check_valid(const Kernel& k, const Term& formula, Fragment fragment);

// |- t tagged "arith-oracle" if valid; throws Error otherwise ("not valid",
// with a countermodel when one was found).
Theorem arith_rule(const Kernel& k, const Term& t, Fragment fragment = Fragment::User);

inline const char* kOracleTag = "arith-oracle";

}  // namespace cstar::arith
