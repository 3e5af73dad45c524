// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Each criterion prints one pass/fail line; the process
// exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "cstar/driver.hpp"
#include "cstar/heap_oracle.hpp"

using namespace cstar;

namespace {

const std::string kRoot = CSTAR_SOURCE_DIR;
int failures = 0;

void report(int number, const std::string& what, bool ok, const std::string& detail = "") {
  printf("criterion %d (%s): %s%s%s\n", number, what.c_str(), ok ? "PASS" : "FAIL",
         detail.empty() ? "" : " -- ", detail.c_str());
  fflush(stdout);
  if (!ok) ++failures;
}

driver::Outcome run_benchmark(const std::string& rel, const std::string& proofs = "") {
  driver::Options opts;
  opts.input = kRoot + "/benchmarks/" + rel;
  opts.include_paths = {kRoot + "/lib"};
  if (!proofs.empty()) opts.proofs_file = kRoot + "/benchmarks/" + proofs;
  std::ostringstream out, err;
  return driver::run_verify(opts, out, err);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Term lit(Kernel& k, long long v) {
  return v < 0 ? mk_app(k.constant("--"), mk_int_literal(BigInt(-v)))
               : mk_int_literal(BigInt(v));
}

void criterion1() {
  struct Entry {
    const char* file;
    const char* proofs;
  } corpus[] = {
      {"swap.cst", ""},
      {"globals.cst", ""},
      {"address_of_local.cst", ""},
      {"no_return.cst", ""},
      {"multi_branch.cst", "multi_branch_proofs.cst"},
      {"mutually_recursive.cst", ""},
      {"malloc_free.cst", ""},
      {"clear.cst", ""},
      {"forall.cst", ""},
  };
  bool ok = true;
  std::string detail;
  for (const auto& e : corpus) {
    auto start = std::chrono::steady_clock::now();
    driver::Outcome o = run_benchmark(e.file, e.proofs);
    double secs = seconds_since(start);
    if (o.exit_code != 0) {
      ok = false;
      detail += std::string(e.file) + " exit " + std::to_string(o.exit_code) + "; ";
    }
    if (secs >= 10.0) {
      ok = false;
      detail += std::string(e.file) + " took " + std::to_string(secs) + "s; ";
    }
    if (std::string(e.file) == "swap.cst") {
      if (!o.vcs.empty() || o.functions.empty() || o.functions[0].proof_blocks != 0) {
        ok = false;
        detail += "swap PB/VC counts off; ";
      }
    }
  }
  report(1, "benchmark corpus green", ok, detail);
}

void criterion2() {
  bool ok = true;
  std::string detail;
  {
    Kernel k;
    sep::Theory th = sep::register_theory(k);
    cfront::CProgram prog =
        cfront::parse_file(kRoot + "/benchmarks/clear.cst", {kRoot + "/lib"});
    const cfront::FuncDef* clear = nullptr;
    for (const auto& f : prog.functions)
      if (f.name == "clear") clear = &f;
    engine::RunContext ctx;
    ctx.theory = &th;
    ctx.program = &prog;
    engine::Engine eng(ctx, *clear);
    quote::SyntaxEnv env;
    env.vars["to"] = mk_var("to", integer_ty());
    env.vars["len"] = mk_var("len", integer_ty());
    Term displayed = quote::parse_term(
        k,
        "fact(len >= 0) ** undef_array_at(to, Tchar, len) ** "
        "data_at(&\"to\", Tptr, to) ** data_at(&\"len\", Tint, len)",
        env);
    if (!sep::sep_reorder_thm(th, eng.state_term(), displayed).has_value()) {
      ok = false;
      detail += "initial state mismatch; ";
    }
  }
  {
    driver::Outcome o = run_benchmark("clear_noproof.cst");
    if (o.exit_code != 2 || o.error.find("no ownership") == std::string::npos) {
      ok = false;
      detail += "missing-maps-to error not reproduced; ";
    }
  }
  {
    driver::Outcome o = run_benchmark("clear.cst");
    if (o.exit_code != 0) {
      ok = false;
      detail += "operational clear failed; ";
    }
  }
  {
    driver::Outcome o = run_benchmark("clear_declarative.cst");
    std::vector<std::string> kinds;
    for (const auto& vc : o.vcs) kinds.push_back(vc.kind);
    bool three = kinds.size() == 3 && kinds[0] == "invariant-establish" &&
                 kinds[1] == "invariant-restore" && kinds[2] == "postcondition";
    if (!three) {
      ok = false;
      detail += "declarative obligations off; ";
    }
    driver::Outcome with = run_benchmark("clear_declarative.cst", "clear_residual.cst");
    if (with.exit_code != 0) {
      ok = false;
      detail += "residual proofs did not discharge; ";
    }
  }
  report(2, "clear end-to-end walkthrough", ok, detail);
}

void criterion3() {
  driver::Outcome o = run_benchmark("reverse.cst", "reverse_proofs.cst");
  bool ok = o.exit_code == 0 && o.vcs.size() >= 1;
  for (const auto& vc : o.vcs) ok = ok && vc.discharged;
  report(3, "reverse verifies with a ghost list and residual VCs", ok,
         "VCs: " + std::to_string(o.vcs.size()));
}

void criterion4() {
  auto start = std::chrono::steady_clock::now();
  Kernel k;
  sep::Theory th = sep::register_theory(k);
  oracle::Bounds b = oracle::default_bounds(th);
  bool ok = true;
  std::string detail;
  int checked = 0;
  for (const auto& tag : th.theory_axiom_tags()) {
    std::string failure;
    if (!oracle::check_statement(th, th.axiom(tag).conclusion(), b, &failure)) {
      ok = false;
      detail += tag + ": " + failure + "; ";
    }
    ++checked;
  }
  double secs = seconds_since(start);
  if (secs >= 60.0) {
    ok = false;
    detail += "suite took " + std::to_string(secs) + "s; ";
  }
  char buf[128];
  snprintf(buf, sizeof buf, "%d axioms in %.1fs", checked, secs);
  report(4, "semantic oracle validates every registered axiom", ok, buf + detail);
}

void criterion5() {
  Kernel k;
  sep::Theory th = sep::register_theory(k);
  oracle::Bounds b = oracle::default_bounds(th);
  std::mt19937 rng(424242);
  bool ok = true;
  std::string detail;

  auto validates = [&](const Theorem& ent) {
    Term c = ent.conclusion();
    if (!is_binary(c, "|--")) return false;
    return oracle::entails_semantically(th, binary_lhs(c), binary_rhs(c), b);
  };

  int la_done = 0;
  for (int round = 0; round < 200 && ok; ++round) {
    int ncells = 1 + static_cast<int>(rng() % 2);
    int base = 4 + static_cast<int>(rng() % 2);
    int n = 1 + static_cast<int>(rng() % 3);
    std::string state_text = "fact(" + std::to_string(n) + " > 0)";
    for (int i = 0; i < ncells; ++i)
      state_text += " ** data_at(" + std::to_string(i) + ", Tchar, " +
                    std::to_string(rng() % 3) + ")";
    state_text += " ** undef_array_at(" + std::to_string(base) + ", Tchar, " +
                  std::to_string(n) + ")";
    quote::SyntaxEnv env;
    Term state = quote::parse_term(k, state_text, env);
    Theorem transform;
    switch (rng() % 3) {
      case 0:
        transform = th.lemma("undef_array_at_select_first",
                             {lit(k, base), k.constant("Tchar"), lit(k, n)});
        break;
      case 1:
        transform = th.lemma("undef_array_at_destruct",
                             {lit(k, base), k.constant("Tchar"), lit(k, n), lit(k, 0)});
        break;
      default:
        transform = k.refl(th.conjuncts(state)[1]);
        break;
    }
    try {
      Theorem out = sep::local_apply_thm(th, state, transform);
      if (!validates(out)) {
        ok = false;
        detail = "local_apply instance " + std::to_string(round) + " fails the oracle";
      }
      ++la_done;
    } catch (const Error& e) {
      ok = false;
      detail = std::string("local_apply raised: ") + e.what();
    }
  }

  int struct_done = 0;
  for (int round = 0; round < 100 && ok; ++round) {
    int n = 2 + static_cast<int>(rng() % 3);
    std::vector<std::string> conjs;
    for (int i = 0; i < n; ++i)
      conjs.push_back("data_at(" + std::to_string(2 * i) + ", Tchar, " +
                      std::to_string(rng() % 3) + ")");
    std::string heap = conjs[0];
    for (int i = 1; i < n; ++i) heap += " ** " + conjs[i];
    quote::SyntaxEnv env;
    Term t = quote::parse_term(k, heap, env);
    try {
      Theorem norm = sep::sep_normalize_thm(th, t);
      Theorem lift = sep::sep_lift_thm(th, quote::parse_term(k, conjs[rng() % n], env), t);
      auto reorder = sep::sep_reorder_thm(th, t, eq_rhs(norm.conclusion()));
      bool fine = validates(sep::entail_of_eq(th, norm)) &&
                  validates(sep::entail_of_eq(th, k.symm(norm))) &&
                  validates(sep::entail_of_eq(th, lift)) && reorder.has_value() &&
                  validates(sep::entail_of_eq(th, *reorder));
      if (!fine) {
        ok = false;
        detail = "structural-rule instance " + std::to_string(round) + " fails";
      }
      ++struct_done;
    } catch (const Error& e) {
      ok = false;
      detail = std::string("structural rule raised: ") + e.what();
    }
  }
  report(5, "randomized derived-rule instances are semantically valid", ok,
         std::to_string(la_done) + " local_apply + " + std::to_string(struct_done) +
             " structural" + (detail.empty() ? "" : "; " + detail));
}

void criterion6() {
  std::mt19937 rng(777);
  bool ok = true;
  std::string detail;
  int done = 0;
  for (int round = 0; round < 50 && ok; ++round) {
    int n = 2 + static_cast<int>(rng() % 5);
    int target = static_cast<int>(rng() % n);
    std::ostringstream program;
    program << "#include \"cstarlib.h\"\n[[cstar::proof(\n";
    std::string heap;
    for (int i = 0; i < n; ++i) {
      program << "    term c" << i << " = `data_at(" << 2 * i << ", Tchar, " << rng() % 3
              << ")`;\n";
      heap += (i ? " ** " : "") + std::string("${c") + std::to_string(i) + ":hprop}";
    }
    program << "    term heap = `" << heap << "`;\n";
    program << "    thm interpreted = sep_lift_one(`${c" << target << ":hprop}`, heap);\n";
    program << "    thm builtin = sep_lift(`${c" << target << ":hprop}`, heap);\n";
    program << "    if (equals_term(conclusion(interpreted), conclusion(builtin)) == 0) {"
               " fail(\"mismatch\"); }\n";
    program << ")]]\n";
    try {
      cfront::CProgram prog =
          cfront::parse_program(program.str(), "fidelity.cst", {kRoot + "/lib"});
      Kernel k;
      sep::Theory th = sep::register_theory(k);
      engine::RunContext ctx;
      ctx.theory = &th;
      ctx.program = &prog;
      proofrt::Interp interp(ctx);
      interp.run_proof_program(cfront::assemble_operational_program(prog));
      ++done;
    } catch (const Error& e) {
      ok = false;
      detail = std::string("round ") + std::to_string(round) + ": " + e.what();
    }
  }
  report(6, "interpreted sep_lift_one matches the builtin on random heaps", ok,
         std::to_string(done) + " heaps" + (detail.empty() ? "" : "; " + detail));
}

void criterion7() {
  Kernel k;
  sep::Theory th = sep::register_theory(k);
  bool ok = true;
  std::string detail;
  quote::SyntaxEnv env;
  for (const char* n : {"to", "i", "len", "x", "y", "z"})
    env.vars[n] = mk_var(n, integer_ty());
  for (const char* s :
       {"len - i > 0 <=> i < len", "len - i - 1 == len - (i + 1)",
        "(to + i * sizeof(Tchar)) + sizeof(Tchar) == to + (i + 1) * sizeof(Tchar)"}) {
    try {
      arith::arith_rule(k, quote::parse_term(k, s, env));
    } catch (const Error&) {
      ok = false;
      detail += std::string("fact rejected: ") + s + "; ";
    }
  }
  try {
    arith::arith_rule(k, quote::parse_term(k, "0 == 1", env));
    ok = false;
    detail += "0 == 1 accepted; ";
  } catch (const Error&) {
  }
  try {
    arith::arith_rule(k, quote::parse_term(k, "x * y == y * x", env));
    ok = false;
    detail += "nonlinear accepted; ";
  } catch (const Error&) {
  }
  std::mt19937 rng(31337);
  Term x = env.vars["x"], y = env.vars["y"], z = env.vars["z"];
  std::vector<Term> vars{x, y, z};
  Term box = quote::parse_term(
      k, "0 - 8 <= x && x <= 8 && (0 - 8 <= y && y <= 8) && (0 - 8 <= z && z <= 8)", env);
  auto rand_affine = [&]() {
    Term sum = lit(k, static_cast<int>(rng() % 9) - 4);
    for (const auto& v : vars) {
      int c = static_cast<int>(rng() % 9) - 4;
      sum = mk_app(mk_app(k.constant("+"), sum),
                   mk_app(mk_app(k.constant("*"), lit(k, c)), v));
    }
    return sum;
  };
  std::function<Term(int)> rand_formula = [&](int depth) -> Term {
    int kind = static_cast<int>(rng() % (depth <= 0 ? 2 : 6));
    switch (kind) {
      case 0: {
        const char* cmp[] = {"<", "<=", ">", ">="};
        return mk_app(mk_app(k.constant(cmp[rng() % 4]), rand_affine()), rand_affine());
      }
      case 1:
        return k.mk_eq(rand_affine(), rand_affine());
      case 2:
        return rules::mk_not(k, rand_formula(depth - 1));
      case 3:
        return rules::mk_conj(k, rand_formula(depth - 1), rand_formula(depth - 1));
      case 4:
        return rules::mk_disj(k, rand_formula(depth - 1), rand_formula(depth - 1));
      default:
        return rules::mk_imp(k, rand_formula(depth - 1), rand_formula(depth - 1));
    }
  };
  int agreements = 0;
  for (int round = 0; round < 300; ++round) {
    Term f = rand_formula(2);
    bool brute = true;
    for (int vx = -8; vx <= 8 && brute; ++vx)
      for (int vy = -8; vy <= 8 && brute; ++vy)
        for (int vz = -8; vz <= 8 && brute; ++vz) {
          Term ground = subst_term({{x, lit(k, vx)}, {y, lit(k, vy)}, {z, lit(k, vz)}}, f);
          if (!arith::check_valid(k, ground, arith::Fragment::User).valid) brute = false;
        }
    bool procedure =
        arith::check_valid(k, rules::mk_imp(k, box, f), arith::Fragment::User).valid;
    if (procedure == brute) ++agreements;
  }
  if (agreements != 300) {
    ok = false;
    detail += "brute-force agreement " + std::to_string(agreements) + "/300; ";
  }
  report(7, "arith_rule: clear-loop facts, brute-force agreement, rejections", ok, detail);
}

void criterion8() {
  Kernel k;
  sep::Theory th = sep::register_theory(k);
  std::mt19937 rng(99991);
  bool ok = true;
  std::string detail;

  std::function<bool(const Term&)> well_typed = [&](const Term& t) -> bool {
    switch (t.kind()) {
      case Term::Kind::Var:
      case Term::Kind::Const:
        return true;
      case Term::Kind::App:
        return t.fn().type().is_fun() && t.fn().type().fun_from() == t.arg().type() &&
               t.fn().type().fun_to() == t.type() && well_typed(t.fn()) &&
               well_typed(t.arg());
      case Term::Kind::Abs:
        return t.type().is_fun() && t.type().fun_from() == t.bound_var().type() &&
               t.type().fun_to() == t.body().type() && well_typed(t.body());
    }
    return false;
  };

  std::vector<Theorem> pool;
  for (const auto& tag : th.theory_axiom_tags()) pool.push_back(th.axiom(tag));
  std::vector<Term> terms;
  {
    quote::SyntaxEnv env;
    for (const char* n : {"x", "y"}) env.vars[n] = mk_var(n, integer_ty());
    for (const char* s : {"x + 1 == 1 + x", "x <= y", "T", "emp |-- emp",
                          "fact(x > 0) ** emp -|- fact(x > 0)"})
      terms.push_back(quote::parse_term(k, s, env));
    Term x = mk_var("x", integer_ty());
    terms.push_back(
        mk_app(mk_abs(x, mk_app(mk_app(k.constant("+"), x), lit(k, 1))), lit(k, 2)));
  }
  int applications = 0, successes = 0;
  auto pick_thm = [&]() -> const Theorem& { return pool[rng() % pool.size()]; };
  for (applications = 0; applications < 10000; ++applications) {
    try {
      Theorem out;
      std::set<std::string> expect;
      bool check_expect = false;
      switch (rng() % 9) {
        case 0:
          out = k.refl(terms[rng() % terms.size()]);
          break;
        case 1: {
          const Theorem& a = pick_thm();
          const Theorem& b = pick_thm();
          expect = a.axioms();
          expect.insert(b.axioms().begin(), b.axioms().end());
          check_expect = true;
          out = k.trans(a, b);
          break;
        }
        case 2: {
          const Theorem& a = pick_thm();
          expect = a.axioms();
          check_expect = true;
          out = k.symm(a);
          break;
        }
        case 3: {
          Term t = terms[rng() % terms.size()];
          out = k.assume(t);
          break;
        }
        case 4: {
          const Theorem& a = pick_thm();
          const Theorem& b = pick_thm();
          expect = a.axioms();
          expect.insert(b.axioms().begin(), b.axioms().end());
          check_expect = true;
          out = k.eq_mp(a, b);
          break;
        }
        case 5: {
          const Theorem& a = pick_thm();
          const Theorem& b = pick_thm();
          expect = a.axioms();
          expect.insert(b.axioms().begin(), b.axioms().end());
          check_expect = true;
          out = k.deduct_antisym(a, b);
          break;
        }
        case 6: {
          const Theorem& a = pick_thm();
          expect = a.axioms();
          check_expect = true;
          out = k.inst(
              {{mk_var("x", integer_ty()), lit(k, static_cast<int>(rng() % 5))}}, a);
          break;
        }
        case 7:
          out = k.beta(terms[terms.size() - 1]);
          break;
        default: {
          const Theorem& a = pick_thm();
          const Theorem& b = pick_thm();
          expect = a.axioms();
          expect.insert(b.axioms().begin(), b.axioms().end());
          check_expect = true;
          out = k.mk_comb_rule(a, b);
          break;
        }
      }
      ++successes;
      if (!(out.conclusion().type() == bool_ty())) {
        ok = false;
        detail = "non-bool conclusion";
        break;
      }
      if (!well_typed(out.conclusion())) {
        ok = false;
        detail = "ill-typed conclusion";
        break;
      }
      for (const auto& h : out.hypotheses())
        if (!(h.type() == bool_ty()) || !well_typed(h)) {
          ok = false;
          detail = "ill-typed hypothesis";
        }
      if (check_expect && out.axioms() != expect) {
        ok = false;
        detail = "provenance closure violated";
        break;
      }
      if (pool.size() < 400) pool.push_back(out);
    } catch (const Error&) {
      // rejected premises are part of the exercise
    }
  }
  report(8, "kernel fuzz: 10000 rule applications stay well-typed", ok,
         std::to_string(successes) + " successes of " + std::to_string(applications) +
             (detail.empty() ? "" : "; " + detail));
}

void criterion9() {
  Kernel k;
  sep::Theory th = sep::register_theory(k);
  bool ok = true;
  std::string detail;
  try {
    HolType i = integer_ty(), h = hprop_ty(), li = list_ty(integer_ty());
    HolType pred = fun_ty(i, bool_ty());
    k.new_constant("dlist_head_repr", fun_ty(i, fun_ty(i, fun_ty(i, fun_ty(li, h)))));
    k.new_constant("free_area_repr", fun_ty(pred, fun_ty(i, fun_ty(i, fun_ty(li, h)))));
    k.new_constant("free_area_head_repr",
                   fun_ty(pred, fun_ty(i, fun_ty(i, fun_ty(li, h)))));
    k.new_constant("store_pageinfo_array", fun_ty(i, fun_ty(i, fun_ty(i, fun_ty(li, h)))));
    k.new_constant("store_zero_array", fun_ty(i, fun_ty(i, fun_ty(i, fun_ty(i, h)))));
    k.new_constant("is_free_1st", fun_ty(li, pred));
    k.new_constant("i2vaddr", fun_ty(i, i));
    k.new_constant("PAGE_SIZE", i);
    quote::SyntaxEnv env;
    for (const char* n : {"max_order", "pool_pre", "vmemmap", "pg_start", "pg_end"})
      env.vars[n] = mk_var(n, integer_ty());
    Term other = mk_var("other_facts", hprop_ty());
    env.antiquote = [&](const std::string& name, const HolType& ty) -> Term {
      if (name == "other_facts_and_representation_predicates" && ty == hprop_ty())
        return other;
      throw QuoteError("unbound " + name);
    };
    Term inv = quote::parse_hprop(k, R"(
exists (buddy_v:integer) (bi:integer) (inv_l:int_list) (inv_dl:int_list)
       (inv_hl:int_list) (i:integer) (order_v:integer) (pg_v:integer).
  data_at(&"max_order", Tuchar, max_order) **
  data_at(&"order", Tuchar, order_v) **
  data_at(&"pg", Tptr, pg_v) **
  data_at(&"buddy", Tptr, buddy_v) **
  data_at(&"pool", Tptr, pool_pre) **
  data_at(&"__hyp_vmemmap", Tptr, vmemmap) **
  dlist_head_repr(pool_pre, 0, max_order, inv_hl) **
  free_area_repr(is_free_1st(inv_l), pg_start, pg_end, inv_l) **
  free_area_head_repr(is_free_1st(inv_l), pg_start, pg_end, inv_dl) **
  store_pageinfo_array(vmemmap, pg_start, pg_end, inv_l) **
  store_zero_array(i2vaddr(i), 0, PAGE_SIZE * (2 EXP order_v),
                   PAGE_SIZE * (2 EXP order_v)) **
  ${other_facts_and_representation_predicates:hprop}
)",
                                    env);
    if (!(inv.type() == hprop_ty())) {
      ok = false;
      detail = "invariant is not an hprop";
    }
    quote::SyntaxEnv env2 = env;
    env2.vars["other_facts"] = other;
    Term again = quote::parse_hprop(k, quote::print_term(inv), env2);
    if (!alpha_eq(inv, again)) {
      ok = false;
      detail = "round trip failed";
    }
  } catch (const Error& e) {
    ok = false;
    detail = e.what();
  }
  report(9, "buddy-allocator loop invariant parses and type-checks", ok, detail);
}

}  // namespace

int main() {
  auto start = std::chrono::steady_clock::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  printf("acceptance suite finished in %.1fs: %s\n", seconds_since(start),
         failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT");
  return failures == 0 ? 0 : 1;
}
