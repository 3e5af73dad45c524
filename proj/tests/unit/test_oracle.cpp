// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "testutil.hpp"

using namespace cstar;
using test::kernel;
using test::qt;
using test::theory;

namespace {
oracle::Bounds& bounds() {
  static oracle::Bounds b = oracle::default_bounds(theory());
  return b;
}
}  // namespace

TEST_CASE("emp holds exactly on the empty heap") {
  oracle::ConcreteHeap empty, one;
  one.cells[3] = 1;
  CHECK(oracle::eval_hprop(theory(), qt("emp"), empty, bounds()));
  CHECK(!oracle::eval_hprop(theory(), qt("emp"), one, bounds()));
}

TEST_CASE("data_at is exact on cells and value") {
  oracle::ConcreteHeap h, bad, extra;
  h.cells[16] = 7;
  bad.cells[16] = 8;
  extra.cells[16] = 7;
  extra.cells[17] = 0;
  Term d = qt("data_at(16, Tchar, 7)");
  CHECK(oracle::eval_hprop(theory(), d, h, bounds()));
  CHECK(!oracle::eval_hprop(theory(), d, bad, bounds()));
  CHECK(!oracle::eval_hprop(theory(), d, extra, bounds()));
}

TEST_CASE("separating conjunction finds a disjoint split in either order") {
  oracle::ConcreteHeap h;
  h.cells[0] = 1;
  h.cells[1] = 2;
  CHECK(oracle::eval_hprop(theory(), qt("data_at(0, Tchar, 1) ** data_at(1, Tchar, 2)"), h,
                           bounds()));
  CHECK(oracle::eval_hprop(theory(), qt("data_at(1, Tchar, 2) ** data_at(0, Tchar, 1)"), h,
                           bounds()));
  CHECK(!oracle::eval_hprop(theory(), qt("data_at(0, Tchar, 1) ** data_at(0, Tchar, 1)"), h,
                            bounds()));
}

TEST_CASE("value ranges make out-of-range data_at unsatisfiable") {
  oracle::ConcreteHeap h;
  h.cells[0] = 44;
  CHECK(!oracle::eval_hprop(theory(), qt("data_at(0, Tchar, 300)"), h, bounds()));
  // multi-byte encoding: Tint uses four little-endian cells
  oracle::ConcreteHeap w;
  w.cells[0] = 1;
  w.cells[1] = 0;
  w.cells[2] = 0;
  w.cells[3] = 0;
  CHECK(oracle::eval_hprop(theory(), qt("data_at(0, Tint, 1)"), w, bounds()));
  // negative values in two's complement
  oracle::ConcreteHeap n;
  n.cells[0] = 0xff;
  CHECK(oracle::eval_hprop(theory(), qt("data_at(0, Tchar, -1)"), n, bounds()));
}

TEST_CASE("entailment examples") {
  CHECK(oracle::entails_semantically(theory(), qt("emp"), qt("emp"), bounds()));
  CHECK(!oracle::entails_semantically(theory(), qt("emp"), qt("data_at(0, Tchar, 0)"),
                                      bounds()));
  // hsep-comm instances over free variables are enumerated
  quote::SyntaxEnv env = test::env_ints({"a", "v"});
  CHECK(oracle::entails_semantically(
      theory(), qt("data_at(a, Tchar, v) ** emp", env), qt("data_at(a, Tchar, v)", env),
      bounds()));
}

TEST_CASE("fact(p) coincides with pure(p) && emp") {
  quote::SyntaxEnv env = test::env_ints({"v"});
  Term lhs = qt("fact(v > 0)", env);
  Term rhs = qt("pure(v > 0) && emp", env);
  for (long long v = -2; v <= 3; ++v) {
    Kernel& k = kernel();
    TermSubst s{{env.vars["v"], v < 0 ? mk_app(k.constant("--"), mk_int_literal(BigInt(-v)))
                                      : mk_int_literal(BigInt(v))}};
    Term l = subst_term(s, lhs), r = subst_term(s, rhs);
    for (const auto& h : oracle::enumerate_heaps(bounds())) {
      if (h.cells.size() > 1) continue;
      CHECK(oracle::eval_hprop(theory(), l, h, bounds()) ==
            oracle::eval_hprop(theory(), r, h, bounds()));
    }
  }
}

TEST_CASE("hiter of a permutation is semantically equivalent") {
  Term l1 = qt("hiter(cons(data_at(0, Tchar, 1), cons(data_at(2, Tchar, 3), nil)))");
  Term l2 = qt("hiter(cons(data_at(2, Tchar, 3), cons(data_at(0, Tchar, 1), nil)))");
  CHECK(oracle::entails_semantically(theory(), l1, l2, bounds()));
  CHECK(oracle::entails_semantically(theory(), l2, l1, bounds()));
  CHECK(oracle::entails_semantically(theory(), qt("hiter((nil:list hprop))"), qt("emp"),
                                     bounds()));
  CHECK(oracle::entails_semantically(theory(), qt("emp"), qt("hiter((nil:list hprop))"),
                                     bounds()));
}

TEST_CASE("selected axioms validate at reduced bounds") {
  // the full suite runs in the acceptance tests; spot-check a few here
  oracle::Bounds small = bounds();
  small.int_min = -1;
  small.int_max = 4;
  small.addr_max = 3;
  for (const char* tag : {"hsep-comm", "fact-merge", "undef_array_at_select_first",
                          "array_at_cons", "hexists-intro", "hite-true"}) {
    std::string failure;
    CAPTURE(tag);
    CHECK(oracle::check_statement(theory(), theory().axiom(tag).conclusion(), small,
                                  &failure));
  }
}

TEST_CASE("sizeof reduces by the registered equations") {
  Theorem sz = theory().axiom("sizeof-Tchar");
  CHECK(alpha_eq(eq_rhs(sz.conclusion()), mk_int_literal(BigInt(1))));
  CHECK(oracle::eval_bool(theory(), qt("sizeof(Tchar) == 1"), bounds()));
  CHECK(oracle::eval_bool(theory(), qt("sizeof(Tint) == 4"), bounds()));
  CHECK(oracle::eval_bool(theory(), qt("sizeof(Tptr) == 8"), bounds()));
}

TEST_CASE("oracle rejects unknown heads and unbounded variables") {
  oracle::ConcreteHeap empty;
  quote::SyntaxEnv env;
  env.vars["mystery"] = mk_var("mystery", hprop_ty());
  CHECK_THROWS_AS(oracle::eval_hprop(theory(), qt("mystery", env), empty, bounds()),
                  OracleError);
}
