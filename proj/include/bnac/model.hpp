#pragma once

// Discrete Bayesian networks, evidence, and the exhaustive-enumeration oracle
// that evaluates the network polynomial term by term.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnac/error.hpp"

namespace bnac {

using VarId = int;
using StateId = int;

struct Variable {
  VarId id = 0;
  std::string name;
  std::vector<std::string> states;

  int card() const { return static_cast<int>(states.size()); }
  std::optional<StateId> state_index(std::string_view state) const;
};

// Conditional probability table of `child` given `parents`. Rows enumerate
// parent instantiations in row-major order (first parent most significant);
// within a row, entries follow the child's state order.
struct Cpt {
  VarId child = 0;
  std::vector<VarId> parents;
  std::vector<double> table;
};

class BayesianNetwork {
 public:
  VarId add_variable(std::string name, std::vector<std::string> states);
  void set_cpt(VarId child, std::vector<VarId> parents, std::vector<double> table);
  void set_learnable(VarId cpt, bool learnable = true);

  int size() const { return static_cast<int>(variables_.size()); }
  const Variable& variable(VarId v) const { return variables_.at(v); }
  const std::vector<Variable>& variables() const { return variables_; }
  const Cpt& cpt(VarId v) const { return cpts_.at(v); }
  Cpt& mutable_cpt(VarId v) { return cpts_.at(v); }
  const std::vector<Cpt>& cpts() const { return cpts_; }
  const std::set<VarId>& learnable() const { return learnable_; }
  bool is_learnable(VarId v) const { return learnable_.count(v) != 0; }

  int card(VarId v) const { return variables_[v].card(); }
  std::optional<VarId> find(std::string_view name) const;

  // Number of parent instantiations of `v`'s CPT.
  std::size_t row_count(VarId v) const;
  // Row of `v`'s CPT selected by a full instantiation (indexed by VarId).
  std::size_t row_of(VarId v, std::span<const StateId> inst) const;
  // Decodes row `row` of `v`'s CPT into parent states, in parent order.
  std::vector<StateId> parent_states(VarId v, std::size_t row) const;
  double theta(VarId v, std::size_t row, StateId state) const {
    return cpts_[v].table[row * card(v) + state];
  }

  std::vector<std::vector<VarId>> children() const;
  // Throws invalid_model if the parent graph has a cycle.
  std::vector<VarId> topological_order() const;

 private:
  std::vector<Variable> variables_;
  std::vector<Cpt> cpts_;
  std::set<VarId> learnable_;
};

struct Atom {
  VarId var = 0;
  StateId state = 0;
  friend auto operator<=>(const Atom&, const Atom&) = default;
};

// Fixed assignments plus disjunctive constraints over (variable, state) atoms.
struct Evidence {
  std::map<VarId, StateId> assignments;
  std::vector<std::vector<Atom>> constraints;

  bool empty() const { return assignments.empty() && constraints.empty(); }
  // True iff a full instantiation satisfies every assignment and constraint.
  bool admits(std::span<const StateId> inst) const;
  // Adds `other`'s facts; throws inconsistent_evidence on conflicting assignments.
  void merge(const Evidence& other);
  std::set<VarId> mentioned() const;
  friend bool operator==(const Evidence&, const Evidence&) = default;
};

struct Diagnostic {
  std::string where;
  std::string message;
};

std::vector<Diagnostic> validate(const BayesianNetwork& net);
// Throws invalid_model listing every violation.
void check_valid(const BayesianNetwork& net);
void check_evidence(const BayesianNetwork& net, const Evidence& ev);

// Rescales rows whose sum lies within `tol` of 1. Rows outside the tolerance
// are left alone for validate() to report.
void normalize_rows(BayesianNetwork& net, double tol = 1e-6);

struct OracleOptions {
  std::uint64_t enumeration_bound = std::uint64_t{1} << 24;
};

struct Term {
  std::vector<StateId> instantiation;
  double weight = 0.0;
};

std::uint64_t instantiation_count(const BayesianNetwork& net);

// Visits every full instantiation admitted by `ev` with its parameter product.
void for_each_term(const BayesianNetwork& net, const Evidence& ev,
                   const std::function<void(std::span<const StateId>, double)>& fn,
                   const OracleOptions& opts = {});

std::vector<Term> enumerate_terms(const BayesianNetwork& net, const Evidence& ev,
                                  const OracleOptions& opts = {});
double brute_force_pr(const BayesianNetwork& net, const Evidence& ev,
                      const OracleOptions& opts = {});
// Posterior Pr(x | ev) for every variable; throws inconsistent_evidence when Pr(ev) = 0.
std::vector<std::vector<double>> brute_force_marginals(const BayesianNetwork& net,
                                                       const Evidence& ev,
                                                       const OracleOptions& opts = {});
// Posterior Pr(x, u | ev) over the family of `cpt`, laid out like its table.
std::vector<double> brute_force_family_marginals(const BayesianNetwork& net,
                                                 const Evidence& ev, VarId cpt,
                                                 const OracleOptions& opts = {});

}  // namespace bnac
