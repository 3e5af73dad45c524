// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "cstar/proofrt.hpp"
#include "testutil.hpp"

using namespace cstar;
using test::kernel;
using test::qt;
using test::theory;

namespace {

// run a source file's operational program start to finish
struct Pipeline {
  cfront::CProgram prog;
  engine::RunContext ctx;
  std::unique_ptr<proofrt::Interp> interp;
  proofrt::RunReport report;

  explicit Pipeline(const std::string& src) {
    prog = cfront::parse_program(src, "test.cst");
    ctx.theory = &theory();
    ctx.program = &prog;
    interp = std::make_unique<proofrt::Interp>(ctx);
    report = interp->run_proof_program(cfront::assemble_operational_program(prog));
  }
};

}  // namespace

TEST_CASE("empty proof block is a no-op") {
  Pipeline p("void f(void) [[cstar::require(`emp`)]] [[cstar::ensure(`emp`)]] { [[cstar::proof( )]] }");
  CHECK(p.ctx.vcs.empty());
  REQUIRE(p.report.functions.size() == 1);
  CHECK(p.report.functions[0].proof_blocks == 1);
}

TEST_CASE("proof-code runtime errors abort with the source location") {
  CHECK_THROWS_WITH_AS(
      Pipeline("void f(void) [[cstar::require(`emp`)]] [[cstar::ensure(`emp`)]] "
               "{ [[cstar::proof( thm t = no_such_rule(`emp`); )]] }"),
      doctest::Contains("unbound function"), VerifyError);
}

TEST_CASE("interpreter runs the operational flow of a store proof") {
  Pipeline p(R"(
void f(char *p)
    [[cstar::require(`fact(1 > 0) ** undef_array_at(p, Tchar, 1)`)]]
    [[cstar::ensure(`data_at(p, Tchar, 7) ** undef_array_at(p + sizeof(Tchar), Tchar, 0)`)]]
{
    [[cstar::proof(
        thm dest = undef_array_at_select_first(`p`, `Tchar`, `1`);
        thm final_thm = local_apply(get_symbolic_state(), dest);
        set_symbolic_state(final_thm);
    )]]
    *p = 7;
}
)");
  CHECK(p.ctx.vcs.empty());
  CHECK(p.ctx.trust.count("undef_array_at_select_first") == 1);
}

TEST_CASE("interpreted sep_lift_one matches the builtin sep_lift") {
  // the prelude's sep_lift_one is proof code; this compares it against the
  // native rule on fixed heaps
  const char* srcs[] = {"${a:hprop} ** ${b:hprop} ** ${c:hprop}",
                        "${c:hprop} ** ${a:hprop} ** ${b:hprop}",
                        "${a:hprop} ** ${c:hprop}",
                        "${a:hprop} ** ${b:hprop} ** ${d:hprop} ** ${c:hprop}",
                        "${c:hprop}"};
  for (const char* heap : srcs) {
    std::string program = std::string(R"(
#include "cstarlib.h"
[[cstar::proof(
    term a = `data_at(0, Tchar, 1)`;
    term b = `data_at(1, Tchar, 2)`;
    term c = `data_at(2, Tchar, 3)`;
    term d = `data_at(3, Tchar, 0)`;
    term heap = `)") + heap + R"(`;
    thm interpreted = sep_lift_one(`data_at(2, Tchar, 3)`, heap);
    thm builtin = sep_lift(`data_at(2, Tchar, 3)`, heap);
    int same = equals_term(conclusion(interpreted), conclusion(builtin));
    if (same == 0) { fail("mismatch"); }
)]]
)";
    cfront::CProgram prog =
        cfront::parse_program(program, "lift.cst", {std::string(CSTAR_SOURCE_DIR) + "/lib"});
    engine::RunContext ctx;
    ctx.theory = &theory();
    ctx.program = &prog;
    proofrt::Interp interp(ctx);
    CAPTURE(heap);
    CHECK_NOTHROW(interp.run_proof_program(cfront::assemble_operational_program(prog)));
  }
}

TEST_CASE("assert_prove records goals and rejects mismatches") {
  engine::RunContext ctx;
  cfront::CProgram empty;
  ctx.theory = &theory();
  ctx.program = &empty;
  proofrt::Interp interp(ctx);
  cfront::Span sp{"t.cst", 1, 1};
  interp.exec_block("assert_prove(refl(`emp`), `emp -|- emp`);", sp, interp.file_scope());
  REQUIRE(interp.proved_goals().size() == 1);
  CHECK(alpha_eq(interp.proved_goals()[0].goal, qt("emp -|- emp")));
  CHECK_THROWS_WITH_AS(
      interp.exec_block("assert_prove(refl(`emp`), `emp |-- emp`);", sp,
                        interp.file_scope()),
      doctest::Contains("assert_prove"), VerifyError);
}

TEST_CASE("rewrite_rule_list stops at NULL and transports the theorem") {
  engine::RunContext ctx;
  cfront::CProgram empty;
  ctx.theory = &theory();
  ctx.program = &empty;
  proofrt::Interp interp(ctx);
  cfront::Span sp{"t.cst", 1, 1};
  interp.exec_block(R"(
      term goal = `fact(2 - 1 > 0) ** emp`;
      thm facts[] = { arith_rule(`2 - 1 == 1`), NULL };
      thm start = entail_refl(goal);
      thm moved = rewrite_rule_list(facts, start);
      term want = `fact(1 > 0) ** emp |-- fact(1 > 0) ** emp`;
      if (equals_term(conclusion(moved), want) == 0) { fail("unexpected rewrite"); }
  )",
                    sp, interp.file_scope());
}

TEST_CASE("user predicate definitions register fold and unfold lemmas") {
  engine::RunContext ctx;
  cfront::CProgram empty;
  ctx.theory = &theory();
  ctx.program = &empty;
  proofrt::Interp interp(ctx);
  cfront::Span sp{"t.cst", 1, 1};
  interp.exec_block(R"(
      define(`twocell(p:integer):hprop = data_at(p, Tchar, 0) ** data_at(p + 1, Tchar, 0)`);
      thm u = twocell_unfold(`5`);
      term want = `twocell(5) -|- data_at(5, Tchar, 0) ** data_at(5 + 1, Tchar, 0)`;
      if (equals_term(conclusion(u), want) == 0) { fail("unfold shape"); }
      thm f = twocell_fold(`5`);
  )",
                    sp, interp.file_scope());
  CHECK(theory().user_definitions().count("twocell") == 1);
  // non-recursive definitions carry no axiom tag
  CHECK(theory().lemma("twocell_unfold", {mk_int_literal(BigInt(5))}).axioms().empty());
}

TEST_CASE("proof language control flow and arrays") {
  engine::RunContext ctx;
  cfront::CProgram empty;
  ctx.theory = &theory();
  ctx.program = &empty;
  proofrt::Interp interp(ctx);
  cfront::Span sp{"t.cst", 1, 1};
  interp.exec_block(R"(
      int total = 0;
      int i = 0;
      while (i < 5) { total = total + i; i = i + 1; }
      if (total != 10) { fail("while loop"); }
      thm rules[] = { refl(`emp`), NULL };
      if (rules[1] != NULL) { fail("array index"); }
      int square(int x) { return x * x; }
      if (square(7) != 49) { fail("function call"); }
  )",
                    sp, interp.file_scope());
}
