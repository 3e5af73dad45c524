// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "testutil.hpp"

using namespace cstar;
using test::kernel;
using test::qt;
using test::theory;

namespace {
quote::SyntaxEnv habc() {
  quote::SyntaxEnv env;
  for (const char* n : {"a", "b", "c", "d"}) env.vars[n] = mk_var(n, hprop_ty());
  return env;
}

// substitutes small ground values for the free variables, then checks the
// entailment with the semantic oracle
bool oracle_validates(const Theorem& ent) {
  static oracle::Bounds b = oracle::default_bounds(theory());
  Term c = ent.conclusion();
  REQUIRE(is_binary(c, "|--"));
  return oracle::entails_semantically(theory(), binary_lhs(c), binary_rhs(c), b);
}
}  // namespace

TEST_CASE("sep_normalize examples") {
  quote::SyntaxEnv env = habc();
  Theorem n = sep::sep_normalize_thm(theory(), qt("(a ** b) ** c", env));
  CHECK(alpha_eq(eq_rhs(n.conclusion()), qt("a ** b ** c", env)));
  // emp units are removed, kept alone when the heap is empty
  Theorem n2 = sep::sep_normalize_thm(theory(), qt("emp ** (a ** emp)", env));
  CHECK(alpha_eq(eq_rhs(n2.conclusion()), env.vars["a"]));
  Theorem n3 = sep::sep_normalize_thm(theory(), qt("emp ** emp", env));
  CHECK(alpha_eq(eq_rhs(n3.conclusion()), qt("emp", env)));
  // facts move before spatials, existentials outermost
  quote::SyntaxEnv env2 = test::env_ints({"len"});
  Term t = quote::parse_term(
      kernel(), "data_at(0, Tchar, 1) ** (exists (i:integer). fact(i <= len) ** emp)", env2);
  Theorem n4 = sep::sep_normalize_thm(theory(), t);
  Term rhs = eq_rhs(n4.conclusion());
  CHECK(theory().is_hexists(rhs));
  CHECK(theory().is_fact(binary_lhs(rhs.arg().body())));
}

TEST_CASE("sep_normalize is idempotent") {
  test::TermGen gen(5);
  for (int i = 0; i < 40; ++i) {
    std::vector<Term> scope;
    Term t = gen.hprop_term(3, scope);
    Theorem n = sep::sep_normalize_thm(theory(), t);
    Theorem n2 = sep::sep_normalize_thm(theory(), eq_rhs(n.conclusion()));
    CHECK(alpha_eq(eq_lhs(n2.conclusion()), eq_rhs(n2.conclusion())));
  }
}

TEST_CASE("sep_reorder examples") {
  quote::SyntaxEnv env = habc();
  auto r = sep::sep_reorder_thm(theory(), qt("a ** b", env), qt("b ** a", env));
  REQUIRE(r.has_value());
  CHECK(alpha_eq(eq_lhs(r->conclusion()), qt("a ** b", env)));
  CHECK(!sep::sep_reorder_thm(theory(), qt("a ** b", env), qt("a ** a", env)).has_value());
  CHECK(!sep::sep_reorder_thm(theory(), qt("a ** b", env), qt("a", env)).has_value());
  // binders are matched modulo alpha
  Term t1 = qt("exists (i:integer). data_at(i, Tchar, 0) ** a", env);
  Term t2 = qt("exists (j:integer). a ** data_at(j, Tchar, 0)", env);
  CHECK(sep::sep_reorder_thm(theory(), t1, t2).has_value());
}

TEST_CASE("sep_lift and hsep rules validated by the oracle") {
  quote::SyntaxEnv env;
  env.vars["a"] = qt("data_at(0, Tchar, 1)");
  env.vars["b"] = qt("data_at(1, Tchar, 2)");
  env.vars["c"] = qt("data_at(2, Tchar, 3)");
  Theorem lifted = sep::sep_lift_thm(theory(), env.vars["c"], qt("a ** b ** c", env));
  CHECK(alpha_eq(eq_rhs(lifted.conclusion()), qt("c ** a ** b", env)));
  CHECK(oracle_validates(sep::entail_of_eq(theory(), lifted)));
  CHECK(oracle_validates(sep::entail_of_eq(theory(), kernel().symm(lifted))));

  Theorem comm = sep::hsep_comm_thm(theory(), env.vars["c"]);
  std::vector<Term> binders;
  Term body = rules::strip_forall(comm.conclusion(), binders);
  CHECK(binders.size() == 1);
  CHECK(is_eq(body));
}

TEST_CASE("local_apply with a refl transform is entailment reflexivity") {
  quote::SyntaxEnv env = test::env_ints({"x"});
  Term state = qt("fact(x > 0) ** data_at(0, Tchar, 1) ** data_at(2, Tchar, 0)", env);
  Theorem transform = kernel().refl(qt("data_at(0, Tchar, 1)", env));
  Theorem out = sep::local_apply_thm(theory(), state, transform);
  CHECK(alpha_eq(binary_lhs(out.conclusion()), state));
  // the right side is a reordering of the state
  CHECK(sep::sep_reorder_thm(theory(), state, binary_rhs(out.conclusion())).has_value());
}

TEST_CASE("local_apply discharges premises from the facts") {
  quote::SyntaxEnv env = test::env_ints({"n"});
  Term state = qt("fact(n > 0) ** undef_array_at(4, Tchar, n)", env);
  Theorem lemma = theory().lemma(
      "undef_array_at_select_first",
      {mk_int_literal(BigInt(4)), kernel().constant("Tchar"), env.vars["n"]});
  Theorem out = sep::local_apply_thm(theory(), state, lemma);
  CHECK(is_binary(out.conclusion(), "|--"));
  // premise not derivable -> error
  Term bad_state = qt("fact(n >= 0) ** undef_array_at(4, Tchar, n)", env);
  CHECK_THROWS_AS(sep::local_apply_thm(theory(), bad_state, lemma), Error);
  // conjunct not present -> error naming the conjunct
  Term no_conj = qt("fact(n > 0) ** emp", env);
  CHECK_THROWS_AS(sep::local_apply_thm(theory(), no_conj, lemma), RuleError);
}

TEST_CASE("randomized local_apply instances validate semantically") {
  std::mt19937 rng(11);
  Kernel& k = kernel();
  int validated = 0;
  for (int round = 0; round < 30; ++round) {
    // a ground state: two cells plus an undefined slice and a fact
    int a1 = rng() % 3, v1 = rng() % 3;
    int base = 4 + static_cast<int>(rng() % 2);
    int n = 1 + static_cast<int>(rng() % 2);
    quote::SyntaxEnv env;
    Term state = qt("fact(" + std::to_string(n) + " > 0) ** data_at(" + std::to_string(a1) +
                        ", Tchar, " + std::to_string(v1) + ") ** undef_array_at(" +
                        std::to_string(base) + ", Tchar, " + std::to_string(n) + ")",
                    env);
    Theorem lemma = theory().lemma("undef_array_at_select_first",
                                   {mk_int_literal(BigInt(base)), k.constant("Tchar"),
                                    mk_int_literal(BigInt(n))});
    Theorem out = sep::local_apply_thm(theory(), state, lemma);
    CHECK(oracle_validates(out));
    ++validated;
  }
  CHECK(validated == 30);
}

TEST_CASE("exists_intro, sep_match, fact and binder helpers") {
  quote::SyntaxEnv env = test::env_ints({"len"});
  Term target = quote::parse_term(
      kernel(), "exists (i:integer). fact(i >= 0) ** data_at(&\"i\", Tint, i)", env);
  Theorem intro = sep::exists_intro_thm(theory(), {mk_int_literal(BigInt(0))}, target);
  CHECK(alpha_eq(binary_rhs(intro.conclusion()), target));

  Term state = quote::parse_term(kernel(),
                                 "fact(len >= 0) ** data_at(&\"i\", Tint, 0)", env);
  Theorem matched = sep::sep_match_thm(theory(), state, target, {mk_int_literal(BigInt(0))});
  CHECK(alpha_eq(binary_lhs(matched.conclusion()), state));
  CHECK(alpha_eq(binary_rhs(matched.conclusion()), target));

  // pure_intro and sep_drop_fact
  Theorem widened = sep::pure_intro_thm(theory(), state, qt("len + 1 > 0", env));
  CHECK(is_binary(widened.conclusion(), "|--"));
  Theorem dropped = sep::sep_drop_fact_thm(theory(), state, qt("len >= 0", env));
  CHECK(is_binary(dropped.conclusion(), "|--"));

  // arith_subst rewrites occurrences justified by the facts
  Term st2 = quote::parse_term(
      kernel(), "fact(len == 3) ** undef_array_at(0, Tchar, len)", env);
  Theorem renamed = sep::arith_subst_thm(theory(), st2, env.vars["len"],
                                         mk_int_literal(BigInt(3)));
  CHECK(quote::print_term(binary_rhs(renamed.conclusion())).find("undef_array_at(&0, Tchar, &3)") !=
        std::string::npos);

  Theorem unused = sep::drop_unused_binders_thm(
      theory(), quote::parse_term(kernel(), "exists (i:integer). fact(len >= 0)", env));
  CHECK(alpha_eq(eq_rhs(unused.conclusion()), qt("fact(len >= 0)", env)));
}

TEST_CASE("rewrite: leftmost-topdown once, refl when no match, bounded fixpoint") {
  Kernel& k = kernel();
  quote::SyntaxEnv env = habc();
  Theorem move = sep::hsep_move_thm(theory(), env.vars["c"]);
  Theorem rewritten = sep::rewrite_once(k, move, qt("a ** c ** b", env));
  CHECK(alpha_eq(eq_rhs(rewritten.conclusion()), qt("c ** a ** b", env)));
  Theorem nomatch = sep::rewrite_once(k, move, qt("a ** b", env));
  CHECK(alpha_eq(eq_lhs(nomatch.conclusion()), eq_rhs(nomatch.conclusion())));

  // divergence guard: comm rewrites forever
  Theorem comm = theory().axiom("hsep-comm");
  Theorem start = k.refl(qt("a ** b", env));
  CHECK_THROWS_AS(sep::rewrite_rule_list(k, {comm}, sep::entail_of_eq(theory(), start), 50),
                  RuleError);
}

TEST_CASE("randomized normalize/lift/reorder theorems hold semantically") {
  std::mt19937 rng(23);
  int validated = 0;
  for (int round = 0; round < 30; ++round) {
    // ground right-associated heaps over distinct cells
    std::vector<std::string> conjs;
    int n = 2 + static_cast<int>(rng() % 3);
    for (int i = 0; i < n; ++i)
      conjs.push_back("data_at(" + std::to_string(i * 2) + ", Tchar, " +
                      std::to_string(rng() % 3) + ")");
    std::string joined = conjs[0];
    for (int i = 1; i < n; ++i) joined += " ** " + conjs[i];
    quote::SyntaxEnv env;
    Term heap = qt(joined, env);
    Term target = qt(conjs[rng() % n], env);
    Theorem lifted = sep::sep_lift_thm(theory(), target, heap);
    CHECK(oracle_validates(sep::entail_of_eq(theory(), lifted)));
    Theorem norm = sep::sep_normalize_thm(theory(), heap);
    CHECK(oracle_validates(sep::entail_of_eq(theory(), norm)));
    ++validated;
  }
  CHECK(validated == 30);
}
