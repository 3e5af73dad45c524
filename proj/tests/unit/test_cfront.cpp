// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>

#include "cstar/cfront.hpp"

using namespace cstar;
using namespace cstar::cfront;

namespace {
const char* kAnnotatedLoop = R"(
void clear(void *to, int len)
    [[cstar::require(`fact(len >= 0) ** undef_array_at(to, Tchar, len)`)]]
    [[cstar::ensure(`array_at(to, Tchar, replicate(len, 0))`)]]
{
    [[cstar::proof( term params = `data_at(&"to", Tptr, to)`; )]]
    int i = 0;
    [[cstar::proof( establish(); )]]
    while (i < len)
        [[cstar::invariant(`exists (i:integer). fact(0 <= i) ** ${params:hprop}`)]]
    {
        [[cstar::proof( single_out_location(); )]]
        *((char *)to + i) = (char) 0;
        i = i + 1;
        [[cstar::proof( reestablish(); )]]
    }
    [[cstar::proof( post(); )]]
}
)";
}  // namespace

TEST_CASE("annotated loop parses into the expected structure") {
  CProgram prog = parse_program(kAnnotatedLoop, "clear.cst");
  REQUIRE(prog.functions.size() == 1);
  const FuncDef& f = prog.functions[0];
  CHECK(f.name == "clear");
  CHECK(f.params.size() == 2);
  CHECK(f.require_text.has_value());
  CHECK(f.ensure_text.has_value());
  int proof_blocks = 0, whiles = 0;
  std::function<void(const std::vector<StmtPtr>&)> walk = [&](const auto& stmts) {
    for (const auto& s : stmts) {
      if (s->k == Stmt::K::ProofBlock) ++proof_blocks;
      if (s->k == Stmt::K::While) {
        ++whiles;
        walk(s->body);
      }
      if (s->k == Stmt::K::If) {
        walk(s->body);
        walk(s->else_body);
      }
    }
  };
  walk(f.body);
  CHECK(proof_blocks == 5);
  CHECK(whiles == 1);
}

TEST_CASE("attribute payloads are byte-identical to the source") {
  CProgram prog = parse_program(kAnnotatedLoop, "clear.cst");
  const FuncDef& f = prog.functions[0];
  CHECK(*f.require_text == "`fact(len >= 0) ** undef_array_at(to, Tchar, len)`");
  bool found_inv = false;
  std::function<void(const std::vector<StmtPtr>&)> walk = [&](const auto& stmts) {
    for (const auto& s : stmts) {
      if (s->k == Stmt::K::While) {
        CHECK(s->text ==
              "`exists (i:integer). fact(0 <= i) ** ${params:hprop}`");
        found_inv = true;
        walk(s->body);
      }
    }
  };
  walk(f.body);
  CHECK(found_inv);
}

TEST_CASE("unsupported constructs are rejected") {
  CHECK_THROWS_WITH_AS(
      parse_program("void f(void) { for (;;) { } }", "x.cst"),
      doctest::Contains("unsupported statement"), ParseError);
  CHECK_THROWS_AS(parse_program("void f(void) { do { } while (1); }", "x.cst"), ParseError);
  CHECK_THROWS_AS(parse_program("void f(int x) { switch (x) { } }", "x.cst"), ParseError);
  CHECK_THROWS_AS(parse_program("void f(void) { goto done; }", "x.cst"), ParseError);
}

TEST_CASE("while without an invariant gets a dedicated diagnostic") {
  CHECK_THROWS_WITH_AS(
      parse_program("void f(int x) { while (x > 0) { x = x - 1; } }", "x.cst"),
      doctest::Contains("invariant"), ParseError);
}

TEST_CASE("empty translation unit") {
  CProgram prog = parse_program("", "empty.cst");
  CHECK(prog.functions.empty());
  CHECK(prog.globals.empty());
  CHECK(prog.global_proof_blocks.empty());
}

TEST_CASE("slicing splits at proof blocks") {
  CProgram prog = parse_program(kAnnotatedLoop, "clear.cst");
  SlicedFunction sliced = slice_segments(prog.functions[0]);
  CHECK(sliced.segments.size() == 6);
  CHECK(sliced.proof_blocks.size() == 5);
  // a proof block inside the loop body splits the body segment there
  const Segment& body_head = sliced.segments[3];
  REQUIRE(!body_head.items.empty());
  CHECK(body_head.items[0].k == EngineItem::K::Store);
}

TEST_CASE("slicing round-trip reconstructs the item stream") {
  CProgram prog = parse_program(kAnnotatedLoop, "clear.cst");
  const FuncDef& f = prog.functions[0];
  SlicedFunction sliced = slice_segments(f);
  // a function with no proof blocks slices to a single segment
  CProgram plain = parse_program("void g(int x) { x = x + 1; }", "p.cst");
  SlicedFunction single = slice_segments(plain.functions[0]);
  CHECK(single.segments.size() == 1);
  CHECK(single.proof_blocks.empty());
  // trailing proof block leaves an empty final segment carrying the exit
  CProgram trailing =
      parse_program("void h(void) { [[cstar::proof( done(); )]] }", "t.cst");
  SlicedFunction tr = slice_segments(trailing.functions[0]);
  REQUIRE(tr.segments.size() == 2);
  CHECK(tr.segments[1].items.size() == 1);
  CHECK(tr.segments[1].items[0].k == EngineItem::K::FuncEnd);
  // concatenating all segments yields the full stream in order
  size_t total = 0;
  for (const auto& seg : sliced.segments) total += seg.items.size();
  std::vector<EngineItem> full;
  for (const auto& seg : sliced.segments)
    full.insert(full.end(), seg.items.begin(), seg.items.end());
  CHECK(full.size() == total);
  CHECK(full.back().k == EngineItem::K::FuncEnd);
}

TEST_CASE("operational program assembly interleaves feeds and blocks") {
  CProgram prog = parse_program(kAnnotatedLoop, "clear.cst");
  ProofProgram assembled = assemble_operational_program(prog);
  REQUIRE(assembled.drivers.size() == 1);
  const FunctionDriver& d = assembled.drivers[0];
  REQUIRE(d.steps.size() == 11);  // 6 feeds interleaved with 5 blocks
  for (size_t i = 0; i < d.steps.size(); ++i)
    CHECK((d.steps[i].k == DriverStep::K::Feed) == (i % 2 == 0));
  // global blocks come first and drivers follow source order
  CProgram two = parse_program(
      "[[cstar::proof( term t = `emp`; )]];\n"
      "void a(void) { }\n"
      "void b(void) { }\n",
      "two.cst");
  ProofProgram pp = assemble_operational_program(two);
  CHECK(pp.global_blocks.size() == 1);
  REQUIRE(pp.drivers.size() == 2);
  CHECK(pp.drivers[0].function->name == "a");
  CHECK(pp.drivers[1].function->name == "b");
}

TEST_CASE("guillemet proof blocks are accepted as sugar") {
  CProgram prog = parse_program(
      "void f(void) { \xC2\xAB thm t = refl(`emp`); \xC2\xBB }", "g.cst");
  REQUIRE(prog.functions[0].body.size() == 1);
  CHECK(prog.functions[0].body[0]->k == Stmt::K::ProofBlock);
  CHECK(prog.functions[0].body[0]->text.find("refl") != std::string::npos);
}

TEST_CASE("ghost parameters and arguments") {
  CProgram prog = parse_program(R"(
void callee(int *p)
    [[cstar::parameter(`x:integer`)]]
    [[cstar::require(`data_at(p, Tint, x)`)]];
void caller(int *p) [[cstar::require(`data_at(p, Tint, 3)`)]] {
    [[cstar::argument(`x = 3`)]] callee(p);
}
)",
                               "ghost.cst");
  REQUIRE(prog.functions.size() == 2);
  CHECK(prog.functions[0].is_declaration);
  CHECK(prog.functions[0].ghost_params.size() == 1);
  const auto& body = prog.functions[1].body;
  REQUIRE(body.size() == 1);
  REQUIRE(body[0]->call.has_value());
  REQUIRE(body[0]->call->ghost_args.size() == 1);
  CHECK(body[0]->call->ghost_args[0].first == "x");
}

TEST_CASE("includes resolve textually against the search path") {
  std::string dir = "/tmp/cstar_inc_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream h(dir + "/helper.h");
    h << "int helper(int x) [[cstar::require(`emp`)]] [[cstar::ensure(`emp`)]];\n";
  }
  CProgram prog = parse_program("#include \"helper.h\"\nvoid f(void) { }\n", "main.cst",
                                {dir});
  CHECK(prog.functions.size() == 2);
  CHECK(prog.functions[0].name == "helper");
  CHECK_THROWS_AS(parse_program("#include \"nope.h\"\n", "main.cst", {dir}), ParseError);
}
