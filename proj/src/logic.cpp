#include "bnac/logic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>

namespace bnac {

namespace {

std::size_t lit_index(Lit l) { return 2 * static_cast<std::size_t>(std::abs(l)) + (l < 0 ? 1 : 0); }

}  // namespace

PropagationResult unit_propagate(const WeightedCnf& cnf) {
  PropagationResult res;
  std::vector<std::int8_t> value = cnf.fixed;
  std::vector<std::vector<std::size_t>> occ(2 * (cnf.num_vars + 1));
  for (std::size_t c = 0; c < cnf.clauses.size(); ++c)
    for (Lit l : cnf.clauses[c]) occ[lit_index(l)].push_back(c);

  std::deque<Lit> queue;
  auto truth = [&](Lit l) -> int {
    std::int8_t a = value[std::abs(l)];
    return a == 0 ? 0 : ((a > 0) == (l > 0) ? 1 : -1);
  };
  // Returns false on conflict; enqueues the open literal of unit clauses.
  auto inspect = [&](std::size_t c) {
    Lit open = 0;
    int open_count = 0;
    for (Lit l : cnf.clauses[c]) {
      int t = truth(l);
      if (t > 0) return true;
      if (t == 0) {
        open = l;
        ++open_count;
      }
    }
    if (open_count == 0) return false;
    if (open_count == 1) queue.push_back(open);
    return true;
  };

  for (std::size_t c = 0; c < cnf.clauses.size() && !res.conflict; ++c)
    if (!inspect(c)) res.conflict = true;

  while (!queue.empty() && !res.conflict) {
    Lit l = queue.front();
    queue.pop_front();
    int t = truth(l);
    if (t > 0) continue;
    if (t < 0) {
      res.conflict = true;
      break;
    }
    value[std::abs(l)] = l > 0 ? 1 : -1;
    res.implied.push_back(l);
    for (std::size_t c : occ[lit_index(-l)])
      if (!inspect(c)) {
        res.conflict = true;
        break;
      }
  }

  WeightedCnf& out = res.simplified;
  out = cnf;
  out.clauses.clear();
  out.origin.clear();
  if (res.conflict) return res;
  out.fixed = value;
  for (Lit l : res.implied)
    if (l > 0) out.prefactor *= cnf.weights[l];
  for (std::size_t c = 0; c < cnf.clauses.size(); ++c) {
    std::vector<Lit> kept;
    bool sat = false;
    for (Lit l : cnf.clauses[c]) {
      int t = truth(l);
      if (t > 0) {
        sat = true;
        break;
      }
      if (t == 0) kept.push_back(l);
    }
    if (sat) continue;
    if (kept.size() != cnf.clauses[c].size()) res.shortened.push_back(out.clauses.size());
    out.clauses.push_back(std::move(kept));
    out.origin.push_back(cnf.origin.empty() ? ClauseOrigin::other : cnf.origin[c]);
  }
  return res;
}

WeightedCnf remove_subsumed(const WeightedCnf& cnf) {
  const std::size_t m = cnf.clauses.size();
  std::vector<std::uint64_t> sig(m, 0);
  for (std::size_t c = 0; c < m; ++c)
    for (Lit l : cnf.clauses[c]) sig[c] |= std::uint64_t{1} << (lit_index(l) % 64);

  std::vector<std::size_t> order(m);
  for (std::size_t c = 0; c < m; ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cnf.clauses[a].size() < cnf.clauses[b].size();
  });

  // Kept clauses are indexed under their first literal only, so each
  // candidate is examined at most once per tested clause.
  std::vector<std::vector<std::size_t>> by_first(2 * (cnf.num_vars + 1));
  std::vector<char> mark(2 * (cnf.num_vars + 1), 0);
  std::vector<bool> keep(m, false);
  for (std::size_t c : order) {
    const auto& clause = cnf.clauses[c];
    for (Lit l : clause) mark[lit_index(l)] = 1;
    bool subsumed = false;
    for (Lit l : clause) {
      for (std::size_t s : by_first[lit_index(l)]) {
        if (sig[s] & ~sig[c]) continue;
        const auto& small = cnf.clauses[s];
        if (std::all_of(small.begin(), small.end(), [&](Lit x) { return mark[lit_index(x)]; })) {
          subsumed = true;
          break;
        }
      }
      if (subsumed) break;
    }
    for (Lit l : clause) mark[lit_index(l)] = 0;
    if (subsumed) continue;
    keep[c] = true;
    if (!clause.empty()) by_first[lit_index(clause.front())].push_back(c);
  }

  WeightedCnf out = cnf;
  out.clauses.clear();
  out.origin.clear();
  for (std::size_t c = 0; c < m; ++c) {
    if (!keep[c]) continue;
    out.clauses.push_back(cnf.clauses[c]);
    out.origin.push_back(cnf.origin.empty() ? ClauseOrigin::other : cnf.origin[c]);
  }
  return out;
}

Evidence learned_evidence(const PropagationResult& result, const Evidence& known) {
  if (result.conflict)
    throw Error(ErrorKind::inconsistent_evidence, "unit resolution derived a contradiction");
  const WeightedCnf& cnf = result.simplified;
  Evidence out;
  const VarId n = static_cast<VarId>(cnf.indicator_base.size());
  for (VarId v = 0; v < n; ++v) {
    if (!cnf.has_indicators(v) || known.assignments.count(v)) continue;
    const int card = cnf.var_cards[v];
    std::vector<StateId> open;
    StateId forced = -1;
    for (StateId s = 0; s < card; ++s) {
      std::int8_t f = cnf.fixed[cnf.indicator(v, s)];
      if (f > 0) forced = s;
      if (f == 0) open.push_back(s);
    }
    if (forced < 0 && open.size() == 1) forced = open.front();
    if (forced >= 0) {
      out.assignments[v] = forced;
    } else if (static_cast<int>(open.size()) < card) {
      std::vector<Atom> clause;
      for (StateId s : open) clause.push_back({v, s});
      out.constraints.push_back(std::move(clause));
    }
  }

  for (std::size_t c : result.shortened) {
    const auto& clause = cnf.clauses[c];
    std::vector<Atom> atoms;
    std::map<VarId, int> vars;
    bool pure = true;
    for (Lit l : clause) {
      const BoolVarInfo& vi = cnf.info[std::abs(l)];
      if (vi.kind != VarKind::indicator) {
        pure = false;
        break;
      }
      ++vars[vi.var];
      if (l > 0) {
        atoms.push_back({vi.var, vi.state});
      } else {
        for (StateId s = 0; s < cnf.var_cards[vi.var]; ++s)
          if (s != vi.state) atoms.push_back({vi.var, s});
      }
    }
    if (!pure || vars.size() < 2) continue;
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    if (std::find(out.constraints.begin(), out.constraints.end(), atoms) == out.constraints.end())
      out.constraints.push_back(std::move(atoms));
  }
  return out;
}

WeightedCnf chain_long_clauses(const WeightedCnf& cnf, int max_len) {
  if (max_len < 3) return cnf;
  const auto is_long = [&](const std::vector<Lit>& c) { return static_cast<int>(c.size()) > max_len; };
  if (std::none_of(cnf.clauses.begin(), cnf.clauses.end(), is_long)) return cnf;
  std::vector<int> anchor(cnf.num_vars + 1);
  for (int v = 0; v <= cnf.num_vars; ++v) anchor[v] = v;
  for (const auto& c : cnf.clauses) {
    if (is_long(c)) continue;
    int lo = cnf.num_vars + 1;
    for (Lit l : c) lo = std::min(lo, std::abs(l));
    for (Lit l : c) anchor[std::abs(l)] = std::min(anchor[std::abs(l)], lo);
  }
  WeightedCnf out = cnf;
  out.clauses.clear();
  out.origin.clear();
  for (std::size_t i = 0; i < cnf.clauses.size(); ++i) {
    const auto& c = cnf.clauses[i];
    if (!is_long(c)) {
      out.add_clause(c, cnf.origin[i]);
      continue;
    }
    std::vector<Lit> lits = c;
    std::sort(lits.begin(), lits.end(), [&](Lit a, Lit b) {
      const int va = std::abs(a), vb = std::abs(b);
      return anchor[va] != anchor[vb] ? anchor[va] < anchor[vb] : va < vb;
    });
    Lit prev = lits[0];
    for (std::size_t k = 1; k + 1 < lits.size(); ++k) {
      const Lit z = out.add_var(BoolVarInfo{}, 1.0);
      out.add_clause({-z, prev, lits[k]}, ClauseOrigin::other);
      out.add_clause({z, -prev}, ClauseOrigin::other);
      out.add_clause({z, -lits[k]}, ClauseOrigin::other);
      prev = z;
    }
    out.add_clause({prev, lits.back()}, cnf.origin[i]);
  }
  return out;
}

}  // namespace bnac
