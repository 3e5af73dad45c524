// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cstar/driver.hpp"

using namespace cstar;

namespace {

const std::string kRoot = CSTAR_SOURCE_DIR;

driver::Outcome run(const std::string& rel, const std::string& proofs = "",
                    bool dumps = false, std::string* stdout_text = nullptr) {
  driver::Options opts;
  opts.input = kRoot + "/" + rel;
  opts.include_paths = {kRoot + "/lib"};
  if (!proofs.empty()) opts.proofs_file = kRoot + "/" + proofs;
  opts.dump_states = dumps;
  opts.dump_vcs = dumps;
  opts.trust_report = dumps;
  std::ostringstream out, err;
  driver::Outcome o = driver::run_verify(opts, out, err);
  if (stdout_text) *stdout_text = out.str();
  return o;
}

}  // namespace

TEST_CASE("swap verifies with no proof blocks and no VCs") {
  driver::Outcome o = run("benchmarks/swap.cst");
  CHECK(o.exit_code == 0);
  CHECK(o.vcs.empty());
  REQUIRE(o.functions.size() == 1);
  CHECK(o.functions[0].proof_blocks == 0);
}

TEST_CASE("clear without its proof block stops at the store with exit 2") {
  driver::Outcome o = run("benchmarks/clear_noproof.cst");
  CHECK(o.exit_code == 2);
  CHECK(o.error.find("no ownership") != std::string::npos);
}

TEST_CASE("an empty file verifies vacuously") {
  std::string path = "/tmp/cstar_empty_test.cst";
  std::ofstream(path) << "";
  driver::Options opts;
  opts.input = path;
  std::ostringstream out, err;
  CHECK(driver::run_verify(opts, out, err).exit_code == 0);
}

TEST_CASE("a parse error exits with code 3") {
  std::string path = "/tmp/cstar_parse_err.cst";
  std::ofstream(path) << "void f( {";
  driver::Options opts;
  opts.input = path;
  std::ostringstream out, err;
  CHECK(driver::run_verify(opts, out, err).exit_code == 3);
}

TEST_CASE("dumps are deterministic across runs") {
  std::string first, second;
  run("benchmarks/clear.cst", "", true, &first);
  run("benchmarks/clear.cst", "", true, &second);
  CHECK(!first.empty());
  CHECK(first == second);
}

TEST_CASE("state dump covers every program point in execution order") {
  std::string text;
  driver::Outcome o = run("benchmarks/swap.cst", "", true, &text);
  CHECK(o.states.size() >= 4);  // three statements plus the exit
  CHECK(text.find("data_at") != std::string::npos);
}

TEST_CASE("trust report lists the tags the run relied on") {
  driver::Outcome o = run("benchmarks/clear.cst");
  auto has = [&](const char* tag) {
    for (const auto& t : o.trust)
      if (t == tag) return true;
    return false;
  };
  CHECK(has("arith-oracle"));
  CHECK(has("undef_array_at_select_first"));
  CHECK(has("hsep-comm"));
}

TEST_CASE("emit-residual produces stable identifiers across reruns") {
  driver::Options opts;
  opts.input = kRoot + "/benchmarks/clear_declarative.cst";
  opts.include_paths = {kRoot + "/lib"};
  opts.emit_residual = "/tmp/cstar_skel_a.cst";
  std::ostringstream out, err;
  driver::run_verify(opts, out, err);
  opts.emit_residual = "/tmp/cstar_skel_b.cst";
  driver::run_verify(opts, out, err);
  std::ifstream a("/tmp/cstar_skel_a.cst"), b("/tmp/cstar_skel_b.cst");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().find("term vc1") != std::string::npos);
  CHECK(sa.str().find("assert_prove(proof1(), vc1);") != std::string::npos);
}

TEST_CASE("a program with zero VCs emits an empty skeleton") {
  driver::Options opts;
  opts.input = kRoot + "/benchmarks/swap.cst";
  opts.include_paths = {kRoot + "/lib"};
  opts.emit_residual = "/tmp/cstar_skel_swap.cst";
  std::ostringstream out, err;
  driver::run_verify(opts, out, err);
  std::ifstream f("/tmp/cstar_skel_swap.cst");
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str().find("term vc") == std::string::npos);
}

TEST_CASE("undischarged VCs fail with exit 1; proofs discharge them") {
  driver::Outcome without = run("benchmarks/clear_declarative.cst");
  CHECK(without.exit_code == 1);
  CHECK(without.vcs.size() == 3);
  driver::Outcome with = run("benchmarks/clear_declarative.cst",
                             "benchmarks/clear_residual.cst");
  CHECK(with.exit_code == 0);
  for (const auto& vc : with.vcs) CHECK(vc.discharged);
}
