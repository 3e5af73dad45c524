// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "cstar/arith.hpp"
#include "testutil.hpp"

using namespace cstar;
using test::kernel;
using test::qt;

TEST_CASE("arithmetic normal form matches address spellings") {
  Kernel& k = kernel();
  quote::SyntaxEnv env = test::env_ints({"to", "i", "len"});
  CHECK(arith::match_modulo_arith(k, qt("to + i * sizeof(Tchar)", env), qt("to + i", env)));
  CHECK(arith::match_modulo_arith(k, qt("to + 0 * sizeof(Tchar)", env), qt("to", env)));
  CHECK(arith::match_modulo_arith(k, qt("len - 0", env), qt("len", env)));
  CHECK(arith::match_modulo_arith(k, qt("(to + i * sizeof(Tint)) + sizeof(Tint)", env),
                                  qt("to + (i + 1) * 4", env)));
  CHECK(!arith::match_modulo_arith(k, qt("to + i", env), qt("to + len", env)));
  // normalization folds sizeof of the fixed-size types
  Term nf = arith::arith_normal_term(k, qt("sizeof(Tptr) + sizeof(Tint)", env));
  CHECK(alpha_eq(nf, qt("12", env)));
}

TEST_CASE("the clear-loop rewrite facts are valid") {
  quote::SyntaxEnv env = test::env_ints({"to", "i", "len"});
  for (const char* s : {"len - i > 0 <=> i < len", "len - i - 1 == len - (i + 1)",
                        "(to + i * sizeof(Tchar)) + sizeof(Tchar) == to + (i + 1) * sizeof(Tchar)"}) {
    CAPTURE(s);
    CHECK(arith::check_valid(kernel(), qt(s, env), arith::Fragment::User).valid);
  }
}

TEST_CASE("invalid and nonlinear inputs") {
  quote::SyntaxEnv env = test::env_ints({"x", "y"});
  auto v = arith::check_valid(kernel(), qt("0 == 1", env), arith::Fragment::User);
  CHECK(!v.valid);
  CHECK(!v.countermodel.empty() == false);  // no variables, no countermodel to report
  auto v2 = arith::check_valid(kernel(), qt("x + 1 <= x", env), arith::Fragment::User);
  CHECK(!v2.valid);
  CHECK_THROWS(arith::check_valid(kernel(), qt("x * y == y * x", env),
                                  arith::Fragment::User));
  CHECK_THROWS_AS(arith::arith_rule(kernel(), qt("0 == 1", env)), Error);
  Theorem ok = arith::arith_rule(kernel(), qt("x + 0 == x", env));
  CHECK(ok.axioms() == std::set<std::string>{"arith-oracle"});
}

TEST_CASE("integer reasoning (parity, bounds, equalities)") {
  quote::SyntaxEnv env = test::env_ints({"x", "y", "z"});
  struct Case {
    const char* text;
    bool valid;
  } cases[] = {
      {"2 * x == 1", false},
      {"2 * x == 7 ==> x > 100", true},
      {"x > 0 && x < 3 ==> x == 1 || x == 2", true},
      {"x >= 0 ==> 2 * x >= x", true},
      {"3 * x + 5 * y == 1 ==> x + y >= 0 || x + y < 0", true},
      {"x <= y && y <= z ==> x <= z", true},
      {"x <= y && y <= z ==> x < z", false},
      {"x != x", false},
      {"!(x == x)", false},
      {"x == y || x != y", true},
  };
  for (const auto& c : cases) {
    CAPTURE(c.text);
    CHECK(arith::check_valid(kernel(), qt(c.text, env), arith::Fragment::User).valid ==
          c.valid);
  }
}

TEST_CASE("opaque atoms are treated as variables") {
  quote::SyntaxEnv env;
  env.vars["l"] = mk_var("l", list_ty(integer_ty()));
  env.vars["n"] = mk_var("n", integer_ty());
  // length(l) behaves like an integer unknown
  CHECK(arith::check_valid(kernel(), qt("length(l) == n ==> length(l) + 1 == n + 1", env),
                           arith::Fragment::User)
            .valid);
  // reflexive list equality holds outright under abstraction
  CHECK(arith::check_valid(kernel(), qt("l == l", env), arith::Fragment::AbstractOpaque)
            .valid);
}

TEST_CASE("bounded differential against brute force") {
  // validity of (bounds ==> f) is exactly truth of f over the box
  test::TermGen gen(2024);
  Kernel& k = kernel();
  Term x = mk_var("x", integer_ty()), y = mk_var("y", integer_ty());
  std::vector<Term> scope{x, y};
  quote::SyntaxEnv env = test::env_ints({"x", "y"});
  Term box = qt("0 - 4 <= x && x <= 4 && (0 - 4 <= y && y <= 4)", env);
  int agree = 0;
  for (int i = 0; i < 100; ++i) {
    Term f = gen.bool_term(2, scope, 0);
    bool brute = true;
    for (int vx = -4; vx <= 4 && brute; ++vx)
      for (int vy = -4; vy <= 4 && brute; ++vy) {
        TermSubst s{{x, vx < 0 ? mk_app(k.constant("--"), mk_int_literal(BigInt(-vx)))
                               : mk_int_literal(BigInt(vx))},
                    {y, vy < 0 ? mk_app(k.constant("--"), mk_int_literal(BigInt(-vy)))
                               : mk_int_literal(BigInt(vy))}};
        Term ground = subst_term(s, f);
        if (!arith::check_valid(k, ground, arith::Fragment::User).valid) brute = false;
      }
    Term guarded = rules::mk_imp(k, box, f);
    bool procedure = arith::check_valid(k, guarded, arith::Fragment::User).valid;
    if (procedure == brute) ++agree;
  }
  CHECK(agree == 100);
}
