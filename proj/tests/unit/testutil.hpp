// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <random>
#include <string>

#include "cstar/heap_oracle.hpp"
#include "cstar/quote.hpp"
#include "cstar/sep_rules.hpp"

namespace cstar::test {

// One theory per test binary; registration is append-only and the tests only
// ever add user predicates with unique names.
inline sep::Theory& theory() {
  static Kernel* kernel = new Kernel();
  static sep::Theory* th = new sep::Theory(sep::register_theory(*kernel));
  return *th;
}

inline Kernel& kernel() { return theory().kernel(); }

inline Term qt(const std::string& src, const quote::SyntaxEnv& env = {}) {
  return quote::parse_term(kernel(), src, env);
}

inline quote::SyntaxEnv env_ints(std::initializer_list<const char*> names) {
  quote::SyntaxEnv env;
  for (const char* n : names) env.vars[n] = mk_var(n, integer_ty());
  return env;
}

// Random well-typed term generator over a small signature; used by the
// round-trip, alpha-equivalence, and kernel fuzz suites.
struct TermGen {
  std::mt19937 rng;
  explicit TermGen(unsigned seed) : rng(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  Term int_term(int depth, const std::vector<Term>& scope) {
    std::vector<Term> ints;
    for (const auto& v : scope)
      if (v.type() == integer_ty()) ints.push_back(v);
    int choice = pick(depth <= 0 ? 2 : 4);
    Kernel& k = kernel();
    switch (choice) {
      case 0:
        return mk_int_literal(BigInt(pick(5)));
      case 1:
        if (!ints.empty()) return ints[pick(static_cast<int>(ints.size()))];
        return mk_int_literal(BigInt(pick(5)));
      case 2: {
        const char* ops[] = {"+", "-", "*"};
        return mk_app(mk_app(k.constant(ops[pick(3)]), int_term(depth - 1, scope)),
                      int_term(depth - 1, scope));
      }
      default:
        return mk_app(k.constant("--"), int_term(depth - 1, scope));
    }
  }

  Term bool_term(int depth, std::vector<Term>& scope, int binder_budget = 2) {
    Kernel& k = kernel();
    int choice = pick(depth <= 0 ? 2 : (binder_budget > 0 ? 6 : 5));
    switch (choice) {
      case 0: {
        const char* cmps[] = {"<", "<=", ">", ">="};
        return mk_app(mk_app(k.constant(cmps[pick(4)]), int_term(depth - 1, scope)),
                      int_term(depth - 1, scope));
      }
      case 1:
        return k.mk_eq(int_term(depth - 1, scope), int_term(depth - 1, scope));
      case 2:
        return rules::mk_not(k, bool_term(depth - 1, scope, binder_budget));
      case 3: {
        const char* ops[] = {"&&", "||", "==>"};
        return mk_app(mk_app(k.constant(ops[pick(3)]),
                             bool_term(depth - 1, scope, binder_budget)),
                      bool_term(depth - 1, scope, binder_budget));
      }
      case 4:
        return k.mk_eq(bool_term(depth - 1, scope, binder_budget),
                       bool_term(depth - 1, scope, binder_budget));
      default: {
        Term v = mk_var("b" + std::to_string(pick(1000)), integer_ty());
        scope.push_back(v);
        Term body = bool_term(depth - 1, scope, binder_budget - 1);
        scope.pop_back();
        return pick(2) ? rules::mk_forall(k, v, body) : rules::mk_exists(k, v, body);
      }
    }
  }

  Term hprop_term(int depth, std::vector<Term>& scope, int binder_budget = 1) {
    Kernel& k = kernel();
    sep::Theory& th = theory();
    int choice = pick(depth <= 0 ? 3 : (binder_budget > 0 ? 6 : 5));
    switch (choice) {
      case 0:
        return k.constant("emp");
      case 1:
        return th.mk_fact(bool_term(1, scope, 0));
      case 2:
        return th.mk_data_at(int_term(1, scope), k.constant("Tchar"), int_term(1, scope));
      case 3:
      case 4:
        return th.mk_sep(hprop_term(depth - 1, scope, binder_budget),
                         hprop_term(depth - 1, scope, binder_budget));
      default: {
        Term v = mk_var("e" + std::to_string(pick(1000)), integer_ty());
        scope.push_back(v);
        Term body = hprop_term(depth - 1, scope, binder_budget - 1);
        scope.pop_back();
        return th.mk_hexists(v, body);
      }
    }
  }
};

}  // namespace cstar::test
