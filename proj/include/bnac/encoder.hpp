#pragma once

// Weighted CNF encoding of a (pruned) network with evidence. Models of the
// CNF correspond one-to-one with the terms of the network polynomial that
// survive the evidence.
//
// Boolean variable numbering (1-based, DIMACS style): indicators first,
// variable-major then state-minor, over active network variables; parameters
// next, CPT-major, then retained row, then child state.

#include <cstdint>
#include <iosfwd>
#include <set>
#include <vector>

#include "bnac/model.hpp"
#include "bnac/pruning.hpp"

namespace bnac {

using Lit = int;

enum class VarKind : std::uint8_t { indicator, parameter, auxiliary };

struct BoolVarInfo {
  VarKind kind = VarKind::auxiliary;
  VarId var = -1;       // network variable, or the CPT's child for parameters
  std::int32_t row = -1;  // original CPT row (parameters only)
  StateId state = -1;
};

enum class ClauseOrigin : std::uint8_t {
  indicator,
  ip,
  pi,
  evidence,
  constraint,
  zero_parameter,
  other,
};

struct WeightedCnf {
  int num_vars = 0;
  std::vector<std::vector<Lit>> clauses;
  std::vector<ClauseOrigin> origin;
  // Per Boolean variable, 1-based; entry 0 unused.
  std::vector<double> weights{0.0};
  std::vector<BoolVarInfo> info{BoolVarInfo{}};
  // +1 / -1 once simplification has fixed the variable, 0 while free.
  std::vector<std::int8_t> fixed{0};
  // Product of the weights of variables fixed true.
  double prefactor = 1.0;
  // Per network variable: first indicator id, or 0 when the variable has none.
  std::vector<int> indicator_base;
  std::vector<int> var_cards;

  int add_var(BoolVarInfo info, double weight);
  void add_clause(std::vector<Lit> clause, ClauseOrigin origin);
  bool has_indicators(VarId v) const {
    return v >= 0 && v < static_cast<VarId>(indicator_base.size()) && indicator_base[v] != 0;
  }
  int indicator(VarId v, StateId s) const { return indicator_base[v] + s; }
  std::vector<int> free_vars() const;
};

struct EncodeOptions {
  bool refinements = true;
  // CPTs that keep one Boolean variable per parameter regardless of value.
  std::set<VarId> unrefined;
};

WeightedCnf encode(const PrunedNetwork& net, const Evidence& ev, const EncodeOptions& opts = {});
WeightedCnf encode(std::shared_ptr<const BayesianNetwork> net, const Evidence& ev,
                   const EncodeOptions& opts = {});

// Unit clauses for assignments and one clause per constraint, over the
// indicators already allocated in `cnf`.
std::vector<std::vector<Lit>> encode_evidence_clauses(const Evidence& ev, const WeightedCnf& cnf);

// Exhaustive DPLL reference counter: prefactor times the sum, over assignments
// of the free variables satisfying every clause, of the product of the
// weights of true variables.
double weighted_model_count_oracle(const WeightedCnf& cnf, int max_free_vars = 30);

// "p cnf <vars> <clauses>", clauses terminated by 0, then "w <var> <weight>".
void write_dimacs(const WeightedCnf& cnf, std::ostream& out);
WeightedCnf read_dimacs(std::istream& in);

}  // namespace bnac
