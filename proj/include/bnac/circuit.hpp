#pragma once

// Arithmetic circuits extracted from d-DNNF. Leaves are slots holding
// indicator or parameter values; evaluation is one pass over a topological
// node array, differentiation one more pass in reverse.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnac/compiler.hpp"
#include "bnac/model.hpp"

namespace bnac {

enum class SlotKind : std::uint8_t { indicator, parameter };

struct Slot {
  SlotKind kind = SlotKind::indicator;
  VarId var = 0;   // network variable, or CPT child for parameters
  int row = -1;    // original CPT row (parameters)
  StateId state = 0;
  double value = 1.0;  // indicators 1; parameters their encoded value
};

enum class AcKind : std::uint8_t { leaf, constant, sum, product };

struct AcNode {
  AcKind kind = AcKind::constant;
  int slot = -1;
  double constant = 0.0;
  std::uint32_t first = 0;
  std::uint32_t count = 0;
};

// Full CPT tables indexed by VarId. An empty table keeps the encoded values.
using ParamTables = std::vector<std::vector<double>>;

class ArithmeticCircuit {
 public:
  // Network description carried with the circuit so it can be queried alone.
  std::vector<Variable> variables;
  std::vector<bool> active;
  std::vector<std::size_t> cpt_rows;
  std::set<VarId> learnable;
  Evidence evidence_baked;
  int root = -1;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const AcNode& node(int i) const { return nodes_[i]; }
  std::span<const int> children(int i) const {
    return {edges_.data() + nodes_[i].first, nodes_[i].count};
  }
  const std::vector<Slot>& slots() const { return slots_; }

  int add_slot(const Slot& s);
  int add_leaf(int slot);
  int add_constant(double c);
  int add_node(AcKind kind, std::span<const int> kids);

  // -1 when the slot does not exist.
  int indicator_slot(VarId v, StateId s) const;
  int parameter_slot(VarId cpt, int row, StateId s) const;
  std::optional<VarId> find(std::string_view name) const;

 private:
  std::vector<AcNode> nodes_;
  std::vector<int> edges_;
  std::vector<Slot> slots_;
  std::vector<std::vector<int>> indicator_index_;
  std::vector<std::vector<int>> parameter_index_;  // per cpt: row * card + state
};

// `cnf` is the simplified CNF that produced `g`; its fixed-true variables
// become leaves multiplied into the root, and variables of `universe` (free
// Boolean variables) missing below an Or branch or the root are smoothed in
// as (leaf + 1) factors.
ArithmeticCircuit extract(const DdnnfGraph& g, const WeightedCnf& cnf, const BayesianNetwork& net,
                          const std::vector<bool>& active, std::span<const int> universe);

// Slot values for extra evidence `extra` (assignments only) and parameters.
// Throws unsupported_query for pruned variables or constraint evidence.
std::vector<double> slot_values(const ArithmeticCircuit& ac, const Evidence& extra,
                                const ParamTables& params = {});

template <class T>
T evaluate(const ArithmeticCircuit& ac, std::span<const T> slots, std::vector<T>& scratch);

double evaluate(const ArithmeticCircuit& ac, const Evidence& extra, const ParamTables& params = {});

struct EvalResult {
  double value = 0.0;
  std::vector<double> slot_values;
  std::vector<double> partials;  // d value / d slot
};

template <class T>
void differentiate(const ArithmeticCircuit& ac, std::span<const T> slots, std::vector<T>& values,
                   std::vector<T>& partials, std::vector<T>& slot_partials);

EvalResult differentiate(const ArithmeticCircuit& ac, const Evidence& extra,
                         const ParamTables& params = {});

// Posterior over each active variable given baked and extra evidence.
// Throws inconsistent_evidence when the evidence has probability zero.
std::vector<std::vector<double>> variable_marginals(const ArithmeticCircuit& ac,
                                                    const EvalResult& r);
std::vector<std::vector<double>> variable_marginals(const ArithmeticCircuit& ac,
                                                    const Evidence& extra,
                                                    const ParamTables& params = {});

// Posterior Pr(x, u | e) laid out like the CPT table of `cpt`, which must be
// learnable. Throws unsupported_query otherwise.
std::vector<double> family_marginals(const ArithmeticCircuit& ac, const EvalResult& r, VarId cpt);
std::vector<double> family_marginals(const ArithmeticCircuit& ac, const Evidence& extra,
                                     const ParamTables& params, VarId cpt);

enum class Exec { serial, parallel };

// Circuit value for each slot vector.
std::vector<double> evaluate_batch(const ArithmeticCircuit& ac,
                                   std::span<const std::vector<double>> slot_sets, Exec exec);

void write_ac(const ArithmeticCircuit& ac, std::ostream& out);
ArithmeticCircuit read_ac(std::istream& in);

}  // namespace bnac
