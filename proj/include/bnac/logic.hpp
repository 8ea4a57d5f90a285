#pragma once

// CNF simplification: unit resolution, subsumption removal, and extraction of
// evidence entailed by the injected evidence plus network determinism.

#include <vector>

#include "bnac/encoder.hpp"

namespace bnac {

struct PropagationResult {
  std::vector<Lit> implied;  // in derivation order
  WeightedCnf simplified;    // satisfied clauses dropped, false literals removed
  bool conflict = false;
  // Indices into simplified.clauses of clauses that lost literals.
  std::vector<std::size_t> shortened;
};

PropagationResult unit_propagate(const WeightedCnf& cnf);

WeightedCnf remove_subsumed(const WeightedCnf& cnf);

// Assignments and constraints implied by `result` that `known` does not
// already state. Positive indicator literals, and variables with all states
// but one excluded, become assignments; other excluded states become
// constraints over the remaining states; shortened clauses made only of
// indicator literals over two or more network variables become constraints.
// Throws inconsistent_evidence if the propagation hit a conflict.
Evidence learned_evidence(const PropagationResult& result, const Evidence& known);

// Replaces each clause longer than `max_len` by a chain of auxiliary
// variables z_i <=> z_{i-1} or l_i (weight 1, fully defined, so weighted
// counts are unchanged). Literals are chained in order of the smallest
// variable they share a short clause with. `max_len` < 3 disables it.
WeightedCnf chain_long_clauses(const WeightedCnf& cnf, int max_len);

}  // namespace bnac
