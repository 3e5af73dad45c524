// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0
//
// Concrete syntax for object-logic terms (the quotation grammar), with
// anti-quotation splicing, plus a deterministic printer whose output
// re-parses to an alpha-equal term.
//
// Operators by decreasing precedence:
//   EXP | unary - ! ~ | * / % | + - | < <= > >= == != | && | || | <=> | ==>
//   | ** | `|--` and `-|-` (lowest, non-associative)
// Binders `exists (x:ty). body`, `forall (x:ty). body`, `\(x:ty). body`
// extend maximally to the right; `∃`/`∀` are accepted spellings.
// `==`, `<=>`, and `-|-` all elaborate to the kernel's equality at the
// operand type; `&&` resolves to bool conjunction or hprop conjunction by
// operand type.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "cstar/kernel.hpp"

namespace cstar::quote {

struct SyntaxEnv {
  // Identifier -> term, consulted before registered constants. Used for
  // function parameters, ghost parameters, state binders, program-variable
  // values.
  std::map<std::string, Term> vars;
  // `${v:ty}`: resolves a spliced proof variable. Throws QuoteError if
  // unbound or of the wrong type.
  std::function<Term(const std::string& name, const HolType& ty)> antiquote;
  // Residual-proof mode: unbound identifiers become free variables of the
  // type demanded by their context.
  bool allow_free_vars = false;

  SyntaxEnv& bind(const std::string& name, const Term& t) {
    vars[name] = t;
    return *this;
  }
};

Term parse_term(const Kernel& k, const std::string& src, const SyntaxEnv& env);
Term parse_hprop(const Kernel& k, const std::string& src, const SyntaxEnv& env);
HolType parse_type(const Kernel& k, const std::string& src);

// `name:ty` (ghost parameter declarations).
std::pair<std::string, HolType> parse_typed_name(const Kernel& k, const std::string& src);
// `name = <term source>`: splits at the top-level `=`; the term text is
// returned unparsed so the caller can elaborate it in the right scope.
std::pair<std::string, std::string> split_binding(const std::string& src);

std::string print_term(const Term& t);
std::string print_type(const HolType& ty);

}  // namespace cstar::quote
