#pragma once

// Query-independent network reduction: barren-leaf removal and edge severing
// at observed variables. The result is a view over the original network so
// parameter identities (cpt, row, state) survive for learning.

#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "bnac/model.hpp"

namespace bnac {

struct PrunedFamily {
  std::vector<VarId> kept_parents;
  std::vector<std::pair<VarId, StateId>> severed;
  // Indexed by original row; true when the row agrees with every severed parent.
  std::vector<bool> row_mask;
};

struct PruneReport {
  std::set<VarId> removed_variables;
  std::set<std::pair<VarId, VarId>> severed_edges;
  std::map<VarId, std::vector<bool>> row_selections;
};

class PrunedNetwork {
 public:
  PrunedNetwork() = default;
  // Identity view: every variable active, no edges severed.
  explicit PrunedNetwork(std::shared_ptr<const BayesianNetwork> net);

  const BayesianNetwork& base() const { return *net_; }
  const std::shared_ptr<const BayesianNetwork>& base_ptr() const { return net_; }
  bool is_active(VarId v) const { return active_[v]; }
  const std::vector<bool>& active() const { return active_; }
  const PrunedFamily& family(VarId v) const { return families_[v]; }
  int active_count() const;
  std::size_t edge_count() const;
  std::size_t retained_row_count() const;

  // Original row indices retained for `v`, in increasing order.
  std::vector<std::size_t> retained_rows(VarId v) const;

  // Materializes the active subnetwork. `ids[i]` is the original id of new
  // variable i. Learnable flags carry over.
  BayesianNetwork to_network(std::vector<VarId>* ids = nullptr) const;

  friend bool operator==(const PrunedNetwork& a, const PrunedNetwork& b);

 private:
  friend struct Pruner;
  std::shared_ptr<const BayesianNetwork> net_;
  std::vector<bool> active_;
  std::vector<PrunedFamily> families_;
};

struct PruneResult {
  PrunedNetwork network;
  PruneReport report;
};

PruneResult classical_prune(const PrunedNetwork& in, const Evidence& ev,
                            const std::set<VarId>& query_vars);
PruneResult classical_prune(std::shared_ptr<const BayesianNetwork> net, const Evidence& ev,
                            const std::set<VarId>& query_vars);

// classical_prune on ev extended by learned evidence.
PruneResult reprune_with_learned(const PrunedNetwork& in, const Evidence& ev,
                                 const Evidence& learned, const std::set<VarId>& query_vars);

// Maps evidence on the original network onto the ids of to_network().
Evidence remap_evidence(const Evidence& ev, const std::vector<VarId>& ids);

}  // namespace bnac
