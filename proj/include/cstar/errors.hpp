// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace cstar {

// Base class of all toolchain errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ill-typed term or type construction (mk_app, mk_const, ...).
struct TypeError : Error {
  using Error::Error;
};

// A primitive or derived inference rule rejected its premises.
struct RuleError : Error {
  using Error::Error;
};

// Registry misuse: duplicate names, unknown lookups.
struct RegistryError : Error {
  using Error::Error;
};

// Lexical, syntactic, or elaboration failure in quotations.
struct QuoteError : Error {
  using Error::Error;
};

// C-subset frontend failure, with source position baked into the message.
struct ParseError : Error {
  ParseError(const std::string& msg, int line, int col)
      : Error(msg + " at line " + std::to_string(line) + ", column " + std::to_string(col)),
        line(line), col(col) {}
  int line = 0;
  int col = 0;
};

// Symbolic execution cannot proceed (missing maps-to, protocol violations).
struct ExecError : Error {
  using Error::Error;
};

// Verification failed: assert_prove mismatch, stale state, bad proof value.
struct VerifyError : Error {
  using Error::Error;
};

// Semantic-oracle misuse (non-ground term without bounds, unknown head).
struct OracleError : Error {
  using Error::Error;
};

}  // namespace cstar
