#include "bnac/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace bnac {

int WeightedCnf::add_var(BoolVarInfo vi, double weight) {
  ++num_vars;
  info.push_back(vi);
  weights.push_back(weight);
  fixed.push_back(0);
  return num_vars;
}

void WeightedCnf::add_clause(std::vector<Lit> clause, ClauseOrigin o) {
  std::sort(clause.begin(), clause.end(),
            [](Lit a, Lit b) { return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b; });
  clause.erase(std::unique(clause.begin(), clause.end()), clause.end());
  clauses.push_back(std::move(clause));
  origin.push_back(o);
}

std::vector<int> WeightedCnf::free_vars() const {
  std::vector<int> out;
  for (int v = 1; v <= num_vars; ++v)
    if (fixed[v] == 0) out.push_back(v);
  return out;
}

namespace {

// A cube over the kept parents: state per parent, or -1 where the parent is free.
using Cube = std::vector<int>;

class FamilyEncoder {
 public:
  FamilyEncoder(const PrunedNetwork& pn, VarId v, WeightedCnf& cnf)
      : pn_(pn), net_(pn.base()), v_(v), cnf_(cnf), fam_(pn.family(v)) {
    for (VarId p : fam_.kept_parents) cards_.push_back(net_.card(p));
    rows_ = pn.retained_rows(v);
  }

  // Kept-parent states of the k-th retained row (row-major over kept parents).
  std::vector<int> decode(std::size_t k) const {
    std::vector<int> out(cards_.size());
    for (std::size_t i = cards_.size(); i-- > 0;) {
      out[i] = static_cast<int>(k % cards_[i]);
      k /= cards_[i];
    }
    return out;
  }

  std::size_t encode_index(const std::vector<int>& states) const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < cards_.size(); ++i) k = k * cards_[i] + states[i];
    return k;
  }

  std::vector<Lit> negated_family(const std::vector<int>& parent_states, StateId x) const {
    std::vector<Lit> lits;
    for (std::size_t i = 0; i < parent_states.size(); ++i)
      if (parent_states[i] >= 0)
        lits.push_back(-cnf_.indicator(fam_.kept_parents[i], parent_states[i]));
    lits.push_back(-cnf_.indicator(v_, x));
    return lits;
  }

  // Every completion of the cube lies in `zero`.
  bool inside(const Cube& cube, const std::vector<bool>& zero) const {
    std::vector<int> states(cube.size());
    for (std::size_t i = 0; i < cube.size(); ++i) states[i] = cube[i] < 0 ? 0 : cube[i];
    while (true) {
      if (!zero[encode_index(states)]) return false;
      std::size_t i = cube.size();
      while (i-- > 0) {
        if (cube[i] >= 0) continue;
        if (++states[i] < cards_[i]) break;
        states[i] = 0;
      }
      if (i == static_cast<std::size_t>(-1)) return true;
    }
  }

  static bool covers(const Cube& cube, const std::vector<int>& states) {
    for (std::size_t i = 0; i < cube.size(); ++i)
      if (cube[i] >= 0 && cube[i] != states[i]) return false;
    return true;
  }

  // Zero entries of child state x are forbidden by clauses ¬(cube ∧ x), one
  // per cube of a greedy prime-cube cover of the zero rows.
  void forbid_zeros(StateId x) {
    std::vector<bool> zero(rows_.size());
    bool any = false;
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      zero[k] = net_.theta(v_, rows_[k], x) == 0.0;
      any = any || zero[k];
    }
    if (!any) return;
    std::vector<Cube> cubes;
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      if (!zero[k]) continue;
      auto states = decode(k);
      if (std::any_of(cubes.begin(), cubes.end(),
                      [&](const Cube& c) { return covers(c, states); }))
        continue;
      Cube cube(states.begin(), states.end());
      for (std::size_t i = 0; i < cube.size(); ++i) {
        int keep = cube[i];
        cube[i] = -1;
        if (!inside(cube, zero)) cube[i] = keep;
      }
      cubes.push_back(cube);
    }
    for (const auto& c : cubes) cnf_.add_clause(negated_family(c, x), ClauseOrigin::zero_parameter);
  }

  void run(bool refine) {
    const int card = net_.card(v_);
    if (refine)
      for (StateId x = 0; x < card; ++x) forbid_zeros(x);
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      const std::size_t row = rows_[k];
      const auto states = decode(k);
      for (StateId x = 0; x < card; ++x) {
        const double t = net_.theta(v_, row, x);
        if (refine && (t == 0.0 || t == 1.0)) continue;
        int p = cnf_.add_var({VarKind::parameter, v_, static_cast<std::int32_t>(row), x}, t);
        auto ip = negated_family(states, x);
        ip.push_back(p);
        cnf_.add_clause(std::move(ip), ClauseOrigin::ip);
        for (std::size_t i = 0; i < states.size(); ++i)
          cnf_.add_clause({-p, cnf_.indicator(fam_.kept_parents[i], states[i])}, ClauseOrigin::pi);
        cnf_.add_clause({-p, cnf_.indicator(v_, x)}, ClauseOrigin::pi);
      }
    }
  }

 private:
  const PrunedNetwork& pn_;
  const BayesianNetwork& net_;
  VarId v_;
  WeightedCnf& cnf_;
  const PrunedFamily& fam_;
  std::vector<int> cards_;
  std::vector<std::size_t> rows_;
};

}  // namespace

WeightedCnf encode(const PrunedNetwork& pn, const Evidence& ev, const EncodeOptions& opts) {
  const BayesianNetwork& net = pn.base();
  check_evidence(net, ev);
  WeightedCnf cnf;
  const int n = net.size();
  cnf.indicator_base.assign(n, 0);
  cnf.var_cards.assign(n, 0);
  for (VarId v = 0; v < n; ++v) {
    if (!pn.is_active(v)) continue;
    cnf.var_cards[v] = net.card(v);
    for (StateId s = 0; s < net.card(v); ++s) {
      int id = cnf.add_var({VarKind::indicator, v, -1, s}, 1.0);
      if (s == 0) cnf.indicator_base[v] = id;
    }
  }
  for (VarId v = 0; v < n; ++v) {
    if (!pn.is_active(v)) continue;
    std::vector<Lit> alo;
    for (StateId s = 0; s < net.card(v); ++s) alo.push_back(cnf.indicator(v, s));
    cnf.add_clause(alo, ClauseOrigin::indicator);
    for (StateId i = 0; i < net.card(v); ++i)
      for (StateId j = i + 1; j < net.card(v); ++j)
        cnf.add_clause({-cnf.indicator(v, i), -cnf.indicator(v, j)}, ClauseOrigin::indicator);
  }
  for (VarId v = 0; v < n; ++v) {
    if (!pn.is_active(v)) continue;
    bool refine = opts.refinements && !net.is_learnable(v) && !opts.unrefined.count(v);
    FamilyEncoder(pn, v, cnf).run(refine);
  }
  auto ev_clauses = encode_evidence_clauses(ev, cnf);
  std::size_t units = ev.assignments.size();
  for (std::size_t i = 0; i < ev_clauses.size(); ++i)
    cnf.add_clause(std::move(ev_clauses[i]),
                   i < units ? ClauseOrigin::evidence : ClauseOrigin::constraint);
  return cnf;
}

WeightedCnf encode(std::shared_ptr<const BayesianNetwork> net, const Evidence& ev,
                   const EncodeOptions& opts) {
  return encode(PrunedNetwork(std::move(net)), ev, opts);
}

std::vector<std::vector<Lit>> encode_evidence_clauses(const Evidence& ev, const WeightedCnf& cnf) {
  auto lit = [&](VarId v, StateId s) {
    if (!cnf.has_indicators(v))
      throw Error(ErrorKind::unsupported_query,
                  "evidence mentions variable " + std::to_string(v) + " which was pruned");
    return cnf.indicator(v, s);
  };
  std::vector<std::vector<Lit>> out;
  for (const auto& [v, s] : ev.assignments) out.push_back({lit(v, s)});
  for (const auto& c : ev.constraints) {
    std::vector<Lit> clause;
    for (const Atom& a : c) clause.push_back(lit(a.var, a.state));
    std::sort(clause.begin(), clause.end());
    clause.erase(std::unique(clause.begin(), clause.end()), clause.end());
    out.push_back(std::move(clause));
  }
  return out;
}

namespace {

struct DpllCounter {
  const WeightedCnf& cnf;
  std::vector<std::int8_t> value;

  // Sum over extensions of the current assignment; `value` restored on return.
  double count() {
    for (const auto& clause : cnf.clauses) {
      bool sat = false;
      Lit open = 0;
      for (Lit l : clause) {
        std::int8_t a = value[std::abs(l)];
        if (a == 0) {
          if (open == 0) open = l;
        } else if ((a > 0) == (l > 0)) {
          sat = true;
          break;
        }
      }
      if (sat) continue;
      if (open == 0) return 0.0;
      const int v = std::abs(open);
      value[v] = 1;
      double hi = cnf.weights[v] * count();
      value[v] = -1;
      double lo = count();
      value[v] = 0;
      return hi + lo;
    }
    double free = 1.0;
    for (int v = 1; v <= cnf.num_vars; ++v)
      if (value[v] == 0) free *= 1.0 + cnf.weights[v];
    return free;
  }
};

}  // namespace

double weighted_model_count_oracle(const WeightedCnf& cnf, int max_free_vars) {
  if (static_cast<int>(cnf.free_vars().size()) > max_free_vars)
    throw Error(ErrorKind::bound_exceeded, "too many free variables for exhaustive counting");
  DpllCounter counter{cnf, cnf.fixed};
  // Fixed variables contribute through the prefactor only.
  return cnf.prefactor * counter.count();
}

namespace {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_dimacs(const WeightedCnf& cnf, std::ostream& out) {
  out << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << '\n';
  for (const auto& clause : cnf.clauses) {
    for (Lit l : clause) out << l << ' ';
    out << "0\n";
  }
  for (int v = 1; v <= cnf.num_vars; ++v) out << "w " << v << ' ' << format_double(cnf.weights[v]) << '\n';
}

WeightedCnf read_dimacs(std::istream& in) {
  WeightedCnf cnf;
  std::string line;
  int line_no = 0;
  std::size_t declared_clauses = 0;
  bool header = false;
  std::vector<Lit> pending;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok) || tok == "c") continue;
    if (tok == "p") {
      std::string fmt;
      int vars = 0;
      if (!(ss >> fmt >> vars >> declared_clauses) || fmt != "cnf") fail("bad header");
      for (int v = 0; v < vars; ++v) cnf.add_var({}, 1.0);
      header = true;
      continue;
    }
    if (!header) fail("clause before header");
    if (tok == "w") {
      int v;
      std::string w;
      if (!(ss >> v >> w) || v < 1 || v > cnf.num_vars) fail("bad weight line");
      cnf.weights[v] = std::strtod(w.c_str(), nullptr);
      continue;
    }
    ss.clear();
    ss.str(line);
    Lit l;
    while (ss >> l) {
      if (l == 0) {
        cnf.clauses.push_back(pending);
        cnf.origin.push_back(ClauseOrigin::other);
        pending.clear();
      } else {
        if (std::abs(l) > cnf.num_vars) fail("literal out of range");
        pending.push_back(l);
      }
    }
    if (!ss.eof()) fail("unexpected token");
  }
  if (!header) throw Error(ErrorKind::parse, "line 1: missing header");
  if (!pending.empty()) fail("unterminated clause");
  if (cnf.clauses.size() != declared_clauses) fail("clause count does not match header");
  return cnf;
}

}  // namespace bnac
