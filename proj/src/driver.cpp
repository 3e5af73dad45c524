// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#include "cstar/driver.hpp"

#include <fstream>
#include <iostream>

#include <json.hpp>

namespace cstar::driver {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string residual_skeleton(const std::string& input,
                              const std::vector<engine::VerificationCondition>& vcs) {
  std::string out;
  out += "/* residual proof program for " + input + " */\n";
  out += "[[cstar::proof(\n";
  for (const auto& vc : vcs) {
    out += "    term " + vc.id + " = `" + quote::print_term(vc.goal) + "`;\n";
    out += "    /* " + vc.kind + " at " + vc.origin.file + ":" +
           std::to_string(vc.origin.line) + " */\n\n";
  }
  for (size_t i = 0; i < vcs.size(); ++i) {
    std::string n = std::to_string(i + 1);
    out += "    thm proof" + n + "(void) {\n";
    out += "        /* proof for " + vcs[i].id + " */\n";
    out += "        return NULL;\n";
    out += "    }\n\n";
  }
  for (size_t i = 0; i < vcs.size(); ++i)
    out += "    assert_prove(proof" + std::to_string(i + 1) + "(), " + vcs[i].id + ");\n";
  out += ")]]\n";
  return out;
}

}  // namespace

Outcome run_verify(const Options& opts, std::ostream& out, std::ostream& err) {
  Outcome outcome;
  cfront::CProgram prog;
  try {
    prog = cfront::parse_file(opts.input, opts.include_paths);
  } catch (const ParseError& e) {
    outcome.exit_code = 3;
    outcome.error = e.what();
    err << "parse error: " << e.what() << "\n";
    return outcome;
  } catch (const Error& e) {
    outcome.exit_code = 3;
    outcome.error = e.what();
    err << "error: " << e.what() << "\n";
    return outcome;
  }

  Kernel kernel;
  sep::Theory theory = sep::register_theory(kernel);
  engine::RunContext ctx;
  ctx.theory = &theory;
  ctx.program = &prog;
  proofrt::Interp interp(ctx);

  cfront::ProofProgram assembled = cfront::assemble_operational_program(prog);
  proofrt::RunReport run_report;
  try {
    run_report = interp.run_proof_program(assembled);
  } catch (const ExecError& e) {
    outcome.exit_code = 2;
    outcome.error = e.what();
  } catch (const QuoteError& e) {
    outcome.exit_code = 3;
    outcome.error = e.what();
  } catch (const TypeError& e) {
    outcome.exit_code = 3;
    outcome.error = e.what();
  } catch (const ParseError& e) {
    outcome.exit_code = 3;
    outcome.error = e.what();
  } catch (const Error& e) {
    outcome.exit_code = 1;
    outcome.error = e.what();
  }

  // residual proofs
  if (outcome.exit_code == 0 && opts.proofs_file) {
    try {
      cfront::CProgram proofs = cfront::parse_file(*opts.proofs_file, opts.include_paths);
      if (!proofs.functions.empty() || !proofs.globals.empty())
        throw VerifyError("proofs file must contain only global proof blocks: " +
                          *opts.proofs_file);
      interp.run_residual(proofs);
      // match proved goals against VCs
      for (auto& vc : ctx.vcs) {
        for (const auto& pg : interp.proved_goals()) {
          if (alpha_eq(pg.goal, vc.goal)) {
            vc.discharged = true;
            break;
          }
        }
      }
    } catch (const ParseError& e) {
      outcome.exit_code = 3;
      outcome.error = e.what();
    } catch (const QuoteError& e) {
      outcome.exit_code = 3;
      outcome.error = e.what();
    } catch (const ExecError& e) {
      outcome.exit_code = 2;
      outcome.error = e.what();
    } catch (const Error& e) {
      outcome.exit_code = 1;
      outcome.error = e.what();
    }
  }

  outcome.vcs = ctx.vcs;
  outcome.states = ctx.state_log;
  outcome.auto_discharged = ctx.auto_discharged;
  for (const auto& tag : ctx.trust) outcome.trust.push_back(tag);
  for (const auto& pf : run_report.functions) {
    FunctionReport fr;
    fr.name = pf.name;
    fr.segments = pf.segments;
    fr.proof_blocks = pf.proof_blocks;
    outcome.functions.push_back(fr);
  }

  int undischarged = 0;
  for (const auto& vc : ctx.vcs)
    if (!vc.discharged) ++undischarged;
  if (outcome.exit_code == 0 && undischarged > 0) {
    outcome.exit_code = 1;
    outcome.error = std::to_string(undischarged) + " undischarged verification condition(s)";
  }

  // dumps, in flag-canonical order
  if (opts.dump_states) {
    ordered_json arr = ordered_json::array();
    for (const auto& entry : outcome.states) {
      ordered_json e;
      e["file"] = entry.span.file;
      e["line"] = entry.span.line;
      e["state"] = entry.state;
      arr.push_back(std::move(e));
    }
    out << arr.dump() << "\n";
  }
  if (opts.dump_vcs) {
    ordered_json arr = ordered_json::array();
    for (const auto& vc : outcome.vcs) {
      ordered_json e;
      e["id"] = vc.id;
      e["kind"] = vc.kind;
      e["file"] = vc.origin.file;
      e["line"] = vc.origin.line;
      e["goal"] = quote::print_term(vc.goal);
      arr.push_back(std::move(e));
    }
    out << arr.dump() << "\n";
  }
  if (opts.trust_report) {
    ordered_json arr = ordered_json::array();
    for (const auto& tag : outcome.trust) arr.push_back(tag);
    out << arr.dump() << "\n";
  }
  if (opts.json) {
    ordered_json report;
    report["file"] = opts.input;
    report["verdict"] = outcome.exit_code == 0 ? "verified" : "failed";
    report["exit_code"] = outcome.exit_code;
    if (!outcome.error.empty()) report["error"] = outcome.error;
    report["auto_discharged"] = outcome.auto_discharged;
    ordered_json fns = ordered_json::array();
    for (const auto& fr : outcome.functions) {
      ordered_json f;
      f["name"] = fr.name;
      f["segments"] = fr.segments;
      f["proof_blocks"] = fr.proof_blocks;
      fns.push_back(std::move(f));
    }
    report["functions"] = std::move(fns);
    ordered_json vcs = ordered_json::array();
    for (const auto& vc : outcome.vcs) {
      ordered_json v;
      v["id"] = vc.id;
      v["kind"] = vc.kind;
      v["discharged"] = vc.discharged;
      vcs.push_back(std::move(v));
    }
    report["vcs"] = std::move(vcs);
    ordered_json trust = ordered_json::array();
    for (const auto& tag : outcome.trust) trust.push_back(tag);
    report["trust"] = std::move(trust);
    out << report.dump() << "\n";
  }

  if (opts.emit_residual) {
    std::ofstream f(*opts.emit_residual);
    if (!f) {
      err << "cannot write " << *opts.emit_residual << "\n";
      if (outcome.exit_code == 0) outcome.exit_code = 1;
    } else {
      f << residual_skeleton(opts.input, outcome.vcs);
    }
  }

  // human-readable summary to the diagnostics stream
  if (!opts.json) {
    if (outcome.exit_code == 0) {
      err << opts.input << ": verified (" << outcome.vcs.size() << " VC"
          << (outcome.vcs.size() == 1 ? "" : "s") << ", " << outcome.auto_discharged
          << " auto-discharged)\n";
    } else {
      err << opts.input << ": FAILED (exit " << outcome.exit_code << ")";
      if (!outcome.error.empty()) err << ": " << outcome.error;
      err << "\n";
      for (const auto& vc : outcome.vcs)
        if (!vc.discharged)
          err << "  undischarged " << vc.id << " [" << vc.kind << "] at " << vc.origin.file
              << ":" << vc.origin.line << "\n";
    }
  }
  return outcome;
}

int cmd_verify(const Options& opts) {
  return run_verify(opts, std::cout, std::cerr).exit_code;
}

}  // namespace cstar::driver
