// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "cstar/derived.hpp"
#include "testutil.hpp"

using namespace cstar;
using test::kernel;
using test::qt;

TEST_CASE("mk_app typing") {
  Kernel& k = kernel();
  Term t = k.constant("T");
  Term not_c = k.constant("~");
  Term applied = mk_app(not_c, t);
  CHECK(applied.type() == bool_ty());
  // applying a non-function
  CHECK_THROWS_AS(mk_app(k.constant("emp"), t), TypeError);
  // argument type mismatch
  CHECK_THROWS_AS(mk_app(not_c, k.constant("emp")), TypeError);
}

TEST_CASE("building fact(len >= 0) by constructors matches the parser") {
  Kernel& k = kernel();
  Term len = mk_var("len", integer_ty());
  Term built = mk_app(k.constant("fact"),
                      mk_app(mk_app(k.constant(">="), len), mk_int_literal(BigInt(0))));
  quote::SyntaxEnv env;
  env.vars["len"] = len;
  Term parsed = quote::parse_term(k, "fact(len >= 0)", env);
  CHECK(alpha_eq(built, parsed));
}

TEST_CASE("refl trans symm") {
  Kernel& k = kernel();
  Term e = k.constant("emp");
  Theorem r = k.refl(e);
  CHECK(r.hypotheses().empty());
  CHECK(r.axioms().empty());
  CHECK(alpha_eq(r.conclusion(), k.mk_eq(e, e)));

  Term a = mk_var("a", integer_ty()), b = mk_var("b", integer_ty()),
       c = mk_var("c", integer_ty());
  Theorem ab = k.oracle_theorem("t", k.mk_eq(a, b));
  Theorem bc = k.oracle_theorem("t", k.mk_eq(b, c));
  Theorem ac = k.trans(ab, bc);
  CHECK(alpha_eq(ac.conclusion(), k.mk_eq(a, c)));
  Theorem cd = k.oracle_theorem("t", k.mk_eq(c, a));
  CHECK_THROWS_AS(k.trans(ab, cd), RuleError);

  Theorem ba = k.symm(ab);
  CHECK(alpha_eq(ba.conclusion(), k.mk_eq(b, a)));
  CHECK(alpha_eq(k.symm(ba).conclusion(), ab.conclusion()));
  CHECK_THROWS_AS(k.symm(k.assume(k.constant("T"))), RuleError);
}

TEST_CASE("refl on abstractions is alpha-invariant") {
  Kernel& k = kernel();
  Term x = mk_var("x", integer_ty()), y = mk_var("y", integer_ty());
  Theorem rx = k.refl(mk_abs(x, x));
  Theorem ry = k.refl(mk_abs(y, y));
  CHECK(alpha_eq(rx.conclusion(), ry.conclusion()));
}

TEST_CASE("assume and beta") {
  Kernel& k = kernel();
  Theorem t = k.assume(k.constant("T"));
  CHECK(t.hypotheses().size() == 1);
  CHECK(alpha_eq(t.conclusion(), k.constant("T")));
  CHECK_THROWS_AS(k.assume(k.constant("emp")), RuleError);

  // beta((\x. x + 1) 2) = 2 + 1
  Term x = mk_var("x", integer_ty());
  Term body = mk_app(mk_app(k.constant("+"), x), mk_int_literal(BigInt(1)));
  Term redex = mk_app(mk_abs(x, body), mk_int_literal(BigInt(2)));
  Theorem b = k.beta(redex);
  Term expected =
      mk_app(mk_app(k.constant("+"), mk_int_literal(BigInt(2))), mk_int_literal(BigInt(1)));
  CHECK(alpha_eq(eq_rhs(b.conclusion()), expected));
}

TEST_CASE("inst avoids capture") {
  Kernel& k = kernel();
  // |- exists y. P(x, y), instantiate x := y: the binder must be renamed
  Term x = mk_var("x", integer_ty()), y = mk_var("y", integer_ty());
  Term p = mk_var("P", fun_ty(integer_ty(), fun_ty(integer_ty(), bool_ty())));
  Term body = mk_app(mk_app(p, x), y);
  Term stmt = rules::mk_exists(k, y, body);
  Theorem th = k.oracle_theorem("t", stmt);
  Theorem inst = k.inst({{x, y}}, th);
  // conclusion must be exists y'. P(y, y') with y free exactly once
  Term c = inst.conclusion();
  const Term& lam = c.arg();
  CHECK(lam.is_abs());
  CHECK(is_free_in(y, c));
  CHECK(!(lam.bound_var() == y));  // renamed binder
}

TEST_CASE("alpha equivalence spec cases") {
  Kernel& k = kernel();
  Term x = mk_var("x", integer_ty()), y = mk_var("y", integer_ty());
  CHECK(alpha_eq(mk_abs(x, x), mk_abs(y, y)));
  quote::SyntaxEnv env = test::env_ints({"i"});
  Term d = qt("data_at(&\"i\", Tint, i)", env);
  CHECK(alpha_eq(d, d));
  Term p = mk_var("P", fun_ty(integer_ty(), bool_ty()));
  Term e1 = rules::mk_exists(k, x, mk_app(p, x));
  Term e2 = rules::mk_exists(k, y, mk_app(p, y));
  Term e3 = rules::mk_exists(
      k, y, mk_app(p, mk_app(mk_app(k.constant("+"), y), mk_int_literal(BigInt(1)))));
  CHECK(alpha_eq(e1, e2));
  CHECK(!alpha_eq(e1, e3));
}

TEST_CASE("alpha equivalence is an equivalence relation; substitution commutes") {
  test::TermGen gen(7);
  std::vector<Term> corpus;
  std::vector<Term> scope;
  for (int i = 0; i < 1000; ++i) corpus.push_back(gen.bool_term(3, scope));
  for (const auto& t : corpus) CHECK(alpha_eq(t, t));
  for (size_t i = 0; i + 1 < corpus.size(); i += 2) {
    bool ab = alpha_eq(corpus[i], corpus[i + 1]);
    bool ba = alpha_eq(corpus[i + 1], corpus[i]);
    CHECK(ab == ba);
  }
  // renaming a free variable then substituting agrees with substituting first
  Term x = mk_var("x", integer_ty()), z = mk_var("z_fresh", integer_ty());
  for (size_t i = 0; i < corpus.size(); i += 10) {
    Term direct = subst_term({{x, z}}, corpus[i]);
    CHECK(alpha_eq(direct, subst_term({{x, z}}, direct)));  // idempotent, z not captured
  }
}

TEST_CASE("definitions: registration, lookup, errors") {
  Kernel& k = kernel();
  // hiter-style definition (registered by the theory)
  auto hiter = k.find_definition("hiter");
  REQUIRE(hiter.has_value());
  CHECK(hiter->axioms().empty());
  auto fact_def = k.find_definition("fact");
  REQUIRE(fact_def.has_value());
  // redefining an existing constant
  Term f = mk_var("emp", hprop_ty());
  CHECK_THROWS_AS(k.new_basic_definition("emp", k.mk_eq(f, k.constant("emp"))),
                  RegistryError);
  // free variables in the body are rejected
  Term g = mk_var("bogus_def", integer_ty());
  Term freebody = mk_var("loose", integer_ty());
  CHECK_THROWS_AS(k.new_basic_definition("bogus_def", k.mk_eq(g, freebody)), RuleError);
}

TEST_CASE("axioms: tags and provenance") {
  Kernel& k = kernel();
  auto comm = k.find_axiom("hsep-comm");
  REQUIRE(comm.has_value());
  CHECK(comm->axioms() == std::set<std::string>{"hsep-comm"});
  CHECK_THROWS_AS(k.new_axiom("hsep-comm", k.constant("T")), RegistryError);
  CHECK_THROWS_AS(k.new_axiom("bad-axiom", k.constant("emp")), RuleError);

  // provenance closure through a derivation
  auto assoc = k.find_axiom("hsep-assoc");
  Term h = mk_var("h", hprop_ty());
  Theorem a1 = rules::specialize(k, *comm, {h, h});
  Theorem a2 = rules::specialize(k, *assoc, {h, h, h});
  Theorem joined = rules::conj(k, a1, a2);
  CHECK(joined.axioms() == std::set<std::string>{"hsep-comm", "hsep-assoc"});
}

TEST_CASE("consequent and hypotheses") {
  Kernel& k = kernel();
  quote::SyntaxEnv env;
  env.vars["a"] = mk_var("a", hprop_ty());
  env.vars["b"] = mk_var("b", hprop_ty());
  Term ent = qt("a |-- b", env);
  CHECK(alpha_eq(consequent(ent), env.vars["b"]));
  Term bi = qt("a -|- b", env);
  CHECK(alpha_eq(consequent(bi), env.vars["b"]));
  CHECK_THROWS_AS(consequent(k.constant("T")), RuleError);
  CHECK(kernel().refl(k.constant("emp")).hypotheses().empty());
}

TEST_CASE("deleting a definition leaves the rest constructible") {
  // two kernels: one with an extra definition; theorems not mentioning it
  // replay identically in both
  Kernel k1, k2;
  rules::bootstrap_base_logic(k1);
  rules::bootstrap_base_logic(k2);
  Term c1 = mk_var("extra_const", bool_ty());
  k1.new_basic_definition("extra_const", k1.mk_eq(c1, k1.constant("T")));
  Theorem a1 = rules::truth(k1);
  Theorem a2 = rules::truth(k2);
  CHECK(alpha_eq(a1.conclusion(), a2.conclusion()));
  Term p = mk_var("p", bool_ty());
  Theorem d1 = rules::disch(k1, p, k1.assume(p));
  Theorem d2 = rules::disch(k2, p, k2.assume(p));
  CHECK(alpha_eq(d1.conclusion(), d2.conclusion()));
}
