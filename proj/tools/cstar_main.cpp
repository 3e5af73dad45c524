// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include "cstar/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cstar: proof-integrated verification for a C subset"};
  app.require_subcommand(1);

  cstar::driver::Options opts;
  CLI::App* verify = app.add_subcommand("verify", "verify an annotated C file");
  verify->add_option("file", opts.input, "input .cst file")->required();
  std::string proofs, residual;
  verify->add_option("--proofs", proofs, "residual proof file");
  verify->add_option("--include,-I", opts.include_paths, "include search directory");
  verify->add_flag("--dump-states", opts.dump_states, "JSON state per program point");
  verify->add_flag("--dump-vcs", opts.dump_vcs, "JSON verification conditions");
  verify->add_flag("--trust-report", opts.trust_report, "JSON axiom tags relied upon");
  verify->add_flag("--json", opts.json, "JSON run report");
  verify->add_option("--emit-residual", residual, "write a residual proof skeleton");

  CLI11_PARSE(app, argc, argv);
  if (!proofs.empty()) opts.proofs_file = proofs;
  if (!residual.empty()) opts.emit_residual = residual;
  return cstar::driver::cmd_verify(opts);
}
