#include "bnac/pruning.hpp"

#include <algorithm>

namespace bnac {

PrunedNetwork::PrunedNetwork(std::shared_ptr<const BayesianNetwork> net)
    : net_(std::move(net)) {
  const int n = net_->size();
  active_.assign(n, true);
  families_.resize(n);
  for (VarId v = 0; v < n; ++v) {
    families_[v].kept_parents = net_->cpt(v).parents;
    families_[v].row_mask.assign(net_->row_count(v), true);
  }
}

int PrunedNetwork::active_count() const {
  return static_cast<int>(std::count(active_.begin(), active_.end(), true));
}

std::size_t PrunedNetwork::edge_count() const {
  std::size_t e = 0;
  for (VarId v = 0; v < static_cast<VarId>(active_.size()); ++v)
    if (active_[v]) e += families_[v].kept_parents.size();
  return e;
}

std::size_t PrunedNetwork::retained_row_count() const {
  std::size_t r = 0;
  for (VarId v = 0; v < static_cast<VarId>(active_.size()); ++v)
    if (active_[v]) r += retained_rows(v).size();
  return r;
}

std::vector<std::size_t> PrunedNetwork::retained_rows(VarId v) const {
  std::vector<std::size_t> rows;
  const auto& mask = families_[v].row_mask;
  for (std::size_t r = 0; r < mask.size(); ++r)
    if (mask[r]) rows.push_back(r);
  return rows;
}

BayesianNetwork PrunedNetwork::to_network(std::vector<VarId>* ids) const {
  BayesianNetwork out;
  std::vector<VarId> new_id(active_.size(), -1), old_id;
  for (VarId v = 0; v < static_cast<VarId>(active_.size()); ++v) {
    if (!active_[v]) continue;
    const auto& var = net_->variable(v);
    new_id[v] = out.add_variable(var.name, var.states);
    old_id.push_back(v);
  }
  for (VarId nv = 0; nv < out.size(); ++nv) {
    VarId v = old_id[nv];
    const auto& fam = families_[v];
    const int card = net_->card(v);
    std::vector<VarId> parents;
    for (VarId p : fam.kept_parents) parents.push_back(new_id[p]);
    // Retained rows are exactly the kept-parent instantiations, in row-major
    // order, because severed parents are pinned to one state each.
    std::vector<double> table;
    for (std::size_t r : retained_rows(v))
      for (int s = 0; s < card; ++s) table.push_back(net_->theta(v, r, s));
    out.set_cpt(nv, std::move(parents), std::move(table));
    if (net_->is_learnable(v)) out.set_learnable(nv);
  }
  if (ids) *ids = old_id;
  return out;
}

bool operator==(const PrunedNetwork& a, const PrunedNetwork& b) {
  if (a.net_ != b.net_ || a.active_ != b.active_) return false;
  for (std::size_t v = 0; v < a.families_.size(); ++v) {
    if (!a.active_[v]) continue;
    const auto& fa = a.families_[v];
    const auto& fb = b.families_[v];
    if (fa.kept_parents != fb.kept_parents || fa.severed != fb.severed ||
        fa.row_mask != fb.row_mask)
      return false;
  }
  return true;
}

struct Pruner {
  static PruneResult run(const PrunedNetwork& in, const Evidence& ev,
                         const std::set<VarId>& query_vars) {
    PruneResult res{in, {}};
    PrunedNetwork& out = res.network;
    const BayesianNetwork& net = *out.net_;
    const int n = net.size();

    // Sever edges leaving observed variables and mask the child rows.
    for (VarId v = 0; v < n; ++v) {
      if (!out.active_[v]) continue;
      auto& fam = out.families_[v];
      std::vector<VarId> kept;
      bool changed = false;
      for (VarId p : fam.kept_parents) {
        auto it = ev.assignments.find(p);
        if (it == ev.assignments.end()) {
          kept.push_back(p);
          continue;
        }
        fam.severed.emplace_back(p, it->second);
        res.report.severed_edges.emplace(p, v);
        changed = true;
      }
      if (!changed) continue;
      fam.kept_parents = std::move(kept);
      std::sort(fam.severed.begin(), fam.severed.end());
      const auto& parents = net.cpt(v).parents;
      for (std::size_t r = 0; r < fam.row_mask.size(); ++r) {
        if (!fam.row_mask[r]) continue;
        auto states = net.parent_states(v, r);
        for (std::size_t i = 0; i < parents.size(); ++i) {
          auto it = ev.assignments.find(parents[i]);
          if (it != ev.assignments.end() && it->second != states[i]) {
            fam.row_mask[r] = false;
            break;
          }
        }
      }
      res.report.row_selections[v] = fam.row_mask;
    }

    // Remove barren leaves until fixpoint.
    std::set<VarId> keep = ev.mentioned();
    keep.insert(query_vars.begin(), query_vars.end());
    std::vector<int> child_count(n, 0);
    for (VarId v = 0; v < n; ++v)
      if (out.active_[v])
        for (VarId p : out.families_[v].kept_parents) ++child_count[p];
    std::vector<VarId> stack;
    for (VarId v = 0; v < n; ++v)
      if (out.active_[v] && child_count[v] == 0 && !keep.count(v)) stack.push_back(v);
    while (!stack.empty()) {
      VarId v = stack.back();
      stack.pop_back();
      if (!out.active_[v]) continue;
      out.active_[v] = false;
      res.report.removed_variables.insert(v);
      res.report.row_selections.erase(v);
      for (VarId p : out.families_[v].kept_parents)
        if (--child_count[p] == 0 && out.active_[p] && !keep.count(p)) stack.push_back(p);
    }
    return res;
  }
};

PruneResult classical_prune(const PrunedNetwork& in, const Evidence& ev,
                            const std::set<VarId>& query_vars) {
  return Pruner::run(in, ev, query_vars);
}

PruneResult classical_prune(std::shared_ptr<const BayesianNetwork> net, const Evidence& ev,
                            const std::set<VarId>& query_vars) {
  return Pruner::run(PrunedNetwork(std::move(net)), ev, query_vars);
}

PruneResult reprune_with_learned(const PrunedNetwork& in, const Evidence& ev,
                                 const Evidence& learned, const std::set<VarId>& query_vars) {
  Evidence all = ev;
  all.merge(learned);  // throws inconsistent_evidence on contradiction
  return classical_prune(in, all, query_vars);
}

Evidence remap_evidence(const Evidence& ev, const std::vector<VarId>& ids) {
  std::vector<VarId> inverse;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (static_cast<std::size_t>(ids[i]) >= inverse.size()) inverse.resize(ids[i] + 1, -1);
    inverse[ids[i]] = static_cast<VarId>(i);
  }
  auto map = [&](VarId v) {
    if (v < 0 || static_cast<std::size_t>(v) >= inverse.size() || inverse[v] < 0)
      throw Error(ErrorKind::unsupported_query,
                  "evidence mentions pruned variable " + std::to_string(v));
    return inverse[v];
  };
  Evidence out;
  for (const auto& [v, s] : ev.assignments) out.assignments[map(v)] = s;
  for (const auto& c : ev.constraints) {
    std::vector<Atom> nc;
    for (const Atom& a : c) nc.push_back({map(a.var), a.state});
    out.constraints.push_back(std::move(nc));
  }
  return out;
}

}  // namespace bnac
