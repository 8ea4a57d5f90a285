#include "bnac/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace bnac {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_model: return "invalid-model";
    case ErrorKind::parse: return "parse-error";
    case ErrorKind::inconsistent_evidence: return "inconsistent-evidence";
    case ErrorKind::unsupported_query: return "unsupported-query";
    case ErrorKind::bound_exceeded: return "bound-exceeded";
    case ErrorKind::budget_exceeded: return "budget-exceeded";
    case ErrorKind::io: return "io-error";
    case ErrorKind::usage: return "usage";
    case ErrorKind::internal: return "internal";
  }
  return "internal";
}

std::optional<StateId> Variable::state_index(std::string_view state) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == state) return static_cast<StateId>(i);
  return std::nullopt;
}

VarId BayesianNetwork::add_variable(std::string name, std::vector<std::string> states) {
  VarId id = size();
  variables_.push_back(Variable{id, std::move(name), std::move(states)});
  cpts_.push_back(Cpt{id, {}, {}});
  return id;
}

void BayesianNetwork::set_cpt(VarId child, std::vector<VarId> parents,
                              std::vector<double> table) {
  Cpt& c = cpts_.at(child);
  c.parents = std::move(parents);
  c.table = std::move(table);
}

void BayesianNetwork::set_learnable(VarId cpt, bool learnable) {
  if (learnable)
    learnable_.insert(cpt);
  else
    learnable_.erase(cpt);
}

std::optional<VarId> BayesianNetwork::find(std::string_view name) const {
  for (const auto& v : variables_)
    if (v.name == name) return v.id;
  return std::nullopt;
}

std::size_t BayesianNetwork::row_count(VarId v) const {
  std::size_t rows = 1;
  for (VarId p : cpts_[v].parents) rows *= static_cast<std::size_t>(card(p));
  return rows;
}

std::size_t BayesianNetwork::row_of(VarId v, std::span<const StateId> inst) const {
  std::size_t row = 0;
  for (VarId p : cpts_[v].parents) row = row * card(p) + inst[p];
  return row;
}

std::vector<StateId> BayesianNetwork::parent_states(VarId v, std::size_t row) const {
  const auto& parents = cpts_[v].parents;
  std::vector<StateId> out(parents.size());
  for (std::size_t i = parents.size(); i-- > 0;) {
    int c = card(parents[i]);
    out[i] = static_cast<StateId>(row % c);
    row /= c;
  }
  return out;
}

std::vector<std::vector<VarId>> BayesianNetwork::children() const {
  std::vector<std::vector<VarId>> out(size());
  for (const auto& c : cpts_)
    for (VarId p : c.parents)
      if (p >= 0 && p < size()) out[p].push_back(c.child);
  return out;
}

std::vector<VarId> BayesianNetwork::topological_order() const {
  std::vector<int> pending(size());
  auto kids = children();
  std::vector<VarId> ready, order;
  for (VarId v = 0; v < size(); ++v) {
    pending[v] = static_cast<int>(cpts_[v].parents.size());
    if (pending[v] == 0) ready.push_back(v);
  }
  while (!ready.empty()) {
    VarId v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (VarId c : kids[v])
      if (--pending[c] == 0) ready.push_back(c);
  }
  if (static_cast<int>(order.size()) != size())
    throw Error(ErrorKind::invalid_model, "parent graph is cyclic");
  return order;
}

bool Evidence::admits(std::span<const StateId> inst) const {
  for (const auto& [v, s] : assignments)
    if (inst[v] != s) return false;
  for (const auto& clause : constraints) {
    bool sat = false;
    for (const Atom& a : clause)
      if (inst[a.var] == a.state) {
        sat = true;
        break;
      }
    if (!sat) return false;
  }
  return true;
}

void Evidence::merge(const Evidence& other) {
  for (const auto& [v, s] : other.assignments) {
    auto [it, inserted] = assignments.emplace(v, s);
    if (!inserted && it->second != s)
      throw Error(ErrorKind::inconsistent_evidence,
                  "conflicting assignments for variable " + std::to_string(v));
  }
  for (const auto& c : other.constraints)
    if (std::find(constraints.begin(), constraints.end(), c) == constraints.end())
      constraints.push_back(c);
}

std::set<VarId> Evidence::mentioned() const {
  std::set<VarId> out;
  for (const auto& [v, s] : assignments) out.insert(v);
  for (const auto& c : constraints)
    for (const Atom& a : c) out.insert(a.var);
  return out;
}

std::vector<Diagnostic> validate(const BayesianNetwork& net) {
  std::vector<Diagnostic> out;
  const int n = net.size();
  for (const auto& v : net.variables()) {
    std::string where = "variable " + v.name;
    if (v.states.empty()) out.push_back({where, "empty domain"});
    std::set<std::string> seen(v.states.begin(), v.states.end());
    if (seen.size() != v.states.size()) out.push_back({where, "duplicate state names"});
  }
  bool parents_ok = true;
  for (const auto& c : net.cpts()) {
    const std::string where = "cpt " + net.variable(c.child).name;
    std::set<VarId> uniq;
    for (VarId p : c.parents) {
      if (p < 0 || p >= n) {
        out.push_back({where, "invalid parent id " + std::to_string(p)});
        parents_ok = false;
      } else if (!uniq.insert(p).second) {
        out.push_back({where, "duplicate parent " + net.variable(p).name});
      }
    }
    if (!parents_ok) continue;
    const std::size_t rows = net.row_count(c.child);
    const int card = net.card(c.child);
    if (card == 0) continue;
    if (c.table.size() != rows * card) {
      std::ostringstream msg;
      msg << "dimension mismatch: expected " << rows * card << " entries, found "
          << c.table.size();
      out.push_back({where, msg.str()});
      continue;
    }
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      bool in_range = true;
      for (int s = 0; s < card; ++s) {
        double t = c.table[r * card + s];
        if (!(t >= 0.0 && t <= 1.0)) in_range = false;
        sum += t;
      }
      if (!in_range)
        out.push_back({where + " row " + std::to_string(r), "entry outside [0,1]"});
      if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "row sums to " << sum;
        out.push_back({where + " row " + std::to_string(r), msg.str()});
      }
    }
  }
  if (parents_ok) {
    try {
      (void)net.topological_order();
    } catch (const Error&) {
      out.push_back({"network", "parent graph is cyclic"});
    }
  }
  for (VarId l : net.learnable())
    if (l < 0 || l >= n) out.push_back({"learnable", "invalid cpt id"});
  return out;
}

void check_valid(const BayesianNetwork& net) {
  auto diags = validate(net);
  if (diags.empty()) return;
  std::string msg;
  for (const auto& d : diags) {
    if (!msg.empty()) msg += "; ";
    msg += d.where + ": " + d.message;
  }
  throw Error(ErrorKind::invalid_model, msg);
}

void check_evidence(const BayesianNetwork& net, const Evidence& ev) {
  auto bad_atom = [&](VarId v, StateId s) {
    return v < 0 || v >= net.size() || s < 0 || s >= net.card(v);
  };
  for (const auto& [v, s] : ev.assignments)
    if (bad_atom(v, s))
      throw Error(ErrorKind::invalid_model, "evidence references an invalid state");
  for (const auto& c : ev.constraints) {
    if (c.empty()) throw Error(ErrorKind::invalid_model, "empty evidence constraint");
    for (const Atom& a : c)
      if (bad_atom(a.var, a.state))
        throw Error(ErrorKind::invalid_model, "evidence references an invalid state");
  }
}

void normalize_rows(BayesianNetwork& net, double tol) {
  for (VarId v = 0; v < net.size(); ++v) {
    auto& table = net.mutable_cpt(v).table;
    const int card = net.card(v);
    if (card == 0 || table.size() % card != 0) continue;
    for (std::size_t r = 0; r < table.size() / card; ++r) {
      double sum = 0.0;
      for (int s = 0; s < card; ++s) sum += table[r * card + s];
      const double err = std::abs(sum - 1.0);
      if (err > card * std::numeric_limits<double>::epsilon() && err <= tol)
        for (int s = 0; s < card; ++s) table[r * card + s] /= sum;
    }
  }
}

std::uint64_t instantiation_count(const BayesianNetwork& net) {
  std::uint64_t total = 1;
  for (const auto& v : net.variables()) {
    if (total > (std::uint64_t{1} << 62) / std::max(1, v.card())) return ~std::uint64_t{0};
    total *= static_cast<std::uint64_t>(v.card());
  }
  return total;
}

void for_each_term(const BayesianNetwork& net, const Evidence& ev,
                   const std::function<void(std::span<const StateId>, double)>& fn,
                   const OracleOptions& opts) {
  // Fixed assignments shrink the odometer; constraints are filtered per term.
  std::uint64_t total = 1;
  std::vector<VarId> free_vars;
  for (const auto& v : net.variables()) {
    if (ev.assignments.count(v.id)) continue;
    free_vars.push_back(v.id);
    if (total > opts.enumeration_bound / std::max(1, v.card()) + 1)
      throw Error(ErrorKind::bound_exceeded, "enumeration bound exceeded");
    total *= static_cast<std::uint64_t>(v.card());
  }
  if (total > opts.enumeration_bound)
    throw Error(ErrorKind::bound_exceeded, "enumeration bound exceeded");

  std::vector<StateId> inst(net.size(), 0);
  for (const auto& [v, s] : ev.assignments) inst[v] = s;
  for (std::uint64_t k = 0; k < total; ++k) {
    if (ev.admits(inst)) {
      double w = 1.0;
      for (VarId v = 0; v < net.size(); ++v) w *= net.theta(v, net.row_of(v, inst), inst[v]);
      fn(inst, w);
    }
    for (std::size_t i = free_vars.size(); i-- > 0;) {
      VarId v = free_vars[i];
      if (++inst[v] < net.card(v)) break;
      inst[v] = 0;
    }
  }
}

std::vector<Term> enumerate_terms(const BayesianNetwork& net, const Evidence& ev,
                                  const OracleOptions& opts) {
  std::vector<Term> out;
  for_each_term(
      net, ev,
      [&](std::span<const StateId> inst, double w) {
        out.push_back(Term{{inst.begin(), inst.end()}, w});
      },
      opts);
  return out;
}

double brute_force_pr(const BayesianNetwork& net, const Evidence& ev,
                      const OracleOptions& opts) {
  double total = 0.0;
  for_each_term(net, ev, [&](std::span<const StateId>, double w) { total += w; }, opts);
  return total;
}

std::vector<std::vector<double>> brute_force_marginals(const BayesianNetwork& net,
                                                       const Evidence& ev,
                                                       const OracleOptions& opts) {
  std::vector<std::vector<double>> out(net.size());
  for (VarId v = 0; v < net.size(); ++v) out[v].assign(net.card(v), 0.0);
  double total = 0.0;
  for_each_term(
      net, ev,
      [&](std::span<const StateId> inst, double w) {
        total += w;
        for (VarId v = 0; v < net.size(); ++v) out[v][inst[v]] += w;
      },
      opts);
  if (total <= 0.0)
    throw Error(ErrorKind::inconsistent_evidence, "evidence has probability zero");
  for (auto& dist : out)
    for (double& p : dist) p /= total;
  return out;
}

std::vector<double> brute_force_family_marginals(const BayesianNetwork& net,
                                                 const Evidence& ev, VarId cpt,
                                                 const OracleOptions& opts) {
  const int card = net.card(cpt);
  std::vector<double> out(net.row_count(cpt) * card, 0.0);
  double total = 0.0;
  for_each_term(
      net, ev,
      [&](std::span<const StateId> inst, double w) {
        total += w;
        out[net.row_of(cpt, inst) * card + inst[cpt]] += w;
      },
      opts);
  if (total <= 0.0)
    throw Error(ErrorKind::inconsistent_evidence, "evidence has probability zero");
  for (double& p : out) p /= total;
  return out;
}

}  // namespace bnac
