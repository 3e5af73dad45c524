// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0
//
// The three-stage workflow: translation (cfront), operational proof checking
// (proofrt driving symexec), residual proof checking (--proofs), plus the
// JSON dumps for state/VC inspection and the residual-skeleton emitter.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cstar/proofrt.hpp"

namespace cstar::driver {

struct Options {
  std::string input;
  std::optional<std::string> proofs_file;
  std::vector<std::string> include_paths;
  bool dump_states = false;
  bool dump_vcs = false;
  bool trust_report = false;
  bool json = false;
  std::optional<std::string> emit_residual;
};

struct FunctionReport {
  std::string name;
  int segments = 0;
  int proof_blocks = 0;
  int vcs_emitted = 0;
  int vcs_discharged = 0;
};

struct Outcome {
  int exit_code = 0;
  std::string error;  // diagnostic for nonzero exits
  std::vector<FunctionReport> functions;
  std::vector<engine::VerificationCondition> vcs;
  std::vector<engine::StateLogEntry> states;
  std::vector<std::string> trust;  // sorted tags
  int auto_discharged = 0;
};

// Runs the pipeline; dumps go to `out`, diagnostics and the report to `err`.
Outcome run_verify(const Options& opts, std::ostream& out, std::ostream& err);

// Convenience wrapper over std::cout/std::cerr returning the exit code.
int cmd_verify(const Options& opts);

}  // namespace cstar::driver
