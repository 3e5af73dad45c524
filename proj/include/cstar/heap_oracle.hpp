// cstar: proof-integrated verification for a C subset.
// SPDX-License-Identifier: Apache-2.0
//
// Brute-force semantic oracle: a concrete byte-level heap model and an
// evaluator for ground separation-logic terms. The heap is a finite mapping
// from addresses to bytes; values are encoded little-endian, two's
// complement for the signed C types. Quantifiers are enumerated over
// caller-supplied bounds, which is what makes the tagged axioms empirically
// checkable.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cstar/seplogic.hpp"

namespace cstar::oracle {

struct ConcreteHeap {
  std::map<std::uint64_t, std::uint8_t> cells;

  bool disjoint(const ConcreteHeap& other) const;
  ConcreteHeap disjoint_union(const ConcreteHeap& other) const;  // throws if overlapping
  std::string to_string() const;
  bool operator==(const ConcreteHeap& other) const { return cells == other.cells; }
};

struct Bounds {
  long long int_min = -2;
  long long int_max = 8;
  int addr_max = 7;      // heap addresses 0..addr_max
  int byte_max = 3;      // byte values 0..byte_max when enumerating heaps
  int max_cells = 3;
  int list_max_len = 3;
  long long list_elem_min = 0;
  long long list_elem_max = 3;
  int unfold_depth = 16;          // user-predicate unfolding budget
  std::vector<Term> hprop_pool;   // instantiation family for hprop variables
  // instantiation family for (ty -> hprop) variables, as lambda terms
  std::vector<Term> hprop_fun_pool;
  // instantiation family for (list integer -> bool) variables
  std::vector<Term> list_pred_pool;
};

// Sensible default instantiation pools over the given theory (small data_at /
// fact / emp combinations). Kept deterministic.
Bounds default_bounds(const sep::Theory& th);

// All heaps with addresses in 0..addr_max, at most max_cells cells, byte
// values 0..byte_max.
std::vector<ConcreteHeap> enumerate_heaps(const Bounds& b);

// Ground hprop term against a concrete heap. Throws OracleError for free
// variables or unknown predicate heads.
bool eval_hprop(const sep::Theory& th, const Term& t, const ConcreteHeap& h, const Bounds& b);

// Closed bool term; entailments inside quantify over enumerate_heaps(b).
bool eval_bool(const sep::Theory& th, const Term& t, const Bounds& b);

// Every heap within bounds satisfying lhs satisfies rhs. Free variables of
// either side are enumerated per their type; a free variable whose type has
// no enumeration domain is an error.
bool entails_semantically(const sep::Theory& th, const Term& lhs, const Term& rhs,
                          const Bounds& b);

// Validates a forall-closed bool statement (an axiom) by enumeration.
// On failure writes a description of the failing instance to *failure.
bool check_statement(const sep::Theory& th, const Term& statement, const Bounds& b,
                     std::string* failure);

}  // namespace cstar::oracle
