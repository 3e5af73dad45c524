// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "testutil.hpp"

using namespace cstar;
using test::kernel;
using test::qt;

TEST_CASE("array-clearing precondition parses") {
  quote::SyntaxEnv env = test::env_ints({"len", "to"});
  Term pre = qt("fact(len >= 0) ** undef_array_at(to, Tchar, len)", env);
  CHECK(pre.type() == hprop_ty());
  CHECK(is_binary(pre, "**"));
}

TEST_CASE("emp parses to the constant") {
  Term e = qt("emp");
  CHECK(e.is_const());
  CHECK(e.name() == "emp");
}

TEST_CASE("anti-quotation is exactly substitution") {
  Kernel& k = kernel();
  Term spliced_in = qt("emp ** emp");
  quote::SyntaxEnv env;
  env.antiquote = [&](const std::string& name, const HolType& ty) -> Term {
    if (name == "q" && ty == hprop_ty()) return spliced_in;
    throw QuoteError("unbound " + name);
  };
  env.vars["P"] = mk_var("P", hprop_ty());
  Term via_anti = quote::parse_term(k, "P ** ${q:hprop}", env);
  Term direct = test::theory().mk_sep(env.vars["P"], spliced_in);
  CHECK(alpha_eq(via_anti, direct));
  // wrong annotation type
  CHECK_THROWS_AS(quote::parse_term(k, "${q:integer} + 1", env), QuoteError);
}

TEST_CASE("precedence sanity") {
  quote::SyntaxEnv env;
  env.vars["a"] = mk_var("a", hprop_ty());
  env.vars["b"] = mk_var("b", hprop_ty());
  env.vars["h"] = mk_var("h", hprop_ty());
  env.vars["x"] = mk_var("x", bool_ty());
  env.vars["y"] = mk_var("y", bool_ty());
  Term ent = quote::parse_term(kernel(), "a ** b |-- b ** a", env);
  CHECK(is_binary(ent, "|--"));
  CHECK(is_binary(binary_lhs(ent), "**"));
  CHECK(is_binary(binary_rhs(ent), "**"));
  Term scoped = quote::parse_term(kernel(), "fact(x && y) ** h", env);
  CHECK(is_binary(scoped, "**"));
  CHECK(test::theory().is_fact(binary_lhs(scoped)));
}

TEST_CASE("parse errors") {
  quote::SyntaxEnv env;
  CHECK_THROWS_AS(qt("nosuchident", env), QuoteError);
  CHECK_THROWS_AS(quote::parse_hprop(kernel(), "&3", env), QuoteError);
  CHECK_THROWS_AS(qt("emp **", env), QuoteError);
  CHECK_THROWS_AS(qt("data_at(emp, Tchar, 0)", env), QuoteError);
}

TEST_CASE("binder forms and both spellings") {
  Term a = qt("exists (i:integer). fact(i >= 0)");
  Term b = qt("∃(j:integer). fact(j >= 0)");
  CHECK(alpha_eq(a, b));
  CHECK(test::theory().is_hexists(a));
  std::string printed = quote::print_term(a);
  CHECK(printed.find("exists (") == 0);
  // bool-typed body selects the boolean quantifier
  Term c = qt("exists (i:integer). i >= 0");
  CHECK(c.type() == bool_ty());
}

TEST_CASE("round trip on corpus terms") {
  quote::SyntaxEnv env = test::env_ints({"len", "to", "i"});
  const char* corpus[] = {
      "emp ** emp",
      "fact(len >= 0) ** undef_array_at(to, Tchar, len)",
      "exists (i:integer). fact(0 <= i && i <= len) ** data_at(&\"i\", Tint, i) ** "
      "array_at(to, Tchar, replicate(i, 0)) ** "
      "undef_array_at(to + i * sizeof(Tchar), Tchar, len - i)",
      "len - i > 0 <=> i < len",
      "(to + i * sizeof(Tchar)) + sizeof(Tchar) == to + (i + 1) * sizeof(Tchar)",
      "hiter(cons(emp, nil))",
      "fold_right((**), cons(emp, nil), emp)",
      "a1 ** a2 |-- a2 ** a1",
      "-3 + i == 0 - 3 + i",
  };
  quote::SyntaxEnv env2 = env;
  env2.vars["a1"] = mk_var("a1", hprop_ty());
  env2.vars["a2"] = mk_var("a2", hprop_ty());
  for (const char* src : corpus) {
    Term t = quote::parse_term(kernel(), src, env2);
    Term back = quote::parse_term(kernel(), quote::print_term(t), env2);
    CAPTURE(src);
    CHECK(alpha_eq(t, back));
  }
}

TEST_CASE("round trip on 500 random terms") {
  test::TermGen gen(99);
  quote::SyntaxEnv env;
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    std::vector<Term> scope;
    Term t = i % 2 ? gen.bool_term(3, scope) : gen.hprop_term(3, scope);
    std::string printed = quote::print_term(t);
    quote::SyntaxEnv e2;
    for (const auto& v : free_vars(t)) e2.vars[v.name()] = v;
    Term back = quote::parse_term(kernel(), printed, e2);
    CAPTURE(printed);
    CHECK(alpha_eq(t, back));
    ++checked;
  }
  CHECK(checked == 500);
}

TEST_CASE("typed name and binding payloads") {
  auto [name, ty] = quote::parse_typed_name(kernel(), "l:int_list");
  CHECK(name == "l");
  CHECK(ty == list_ty(integer_ty()));
  auto [var, rest] = quote::split_binding("n = len - 1");
  CHECK(var == "n");
  CHECK(rest.find("len") != std::string::npos);
}
