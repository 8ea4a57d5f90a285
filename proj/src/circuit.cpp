#include "bnac/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace bnac {

int ArithmeticCircuit::add_slot(const Slot& s) {
  const int id = static_cast<int>(slots_.size());
  slots_.push_back(s);
  if (s.var < 0 || s.var >= static_cast<VarId>(variables.size())) return id;
  const int card = variables[s.var].card();
  if (s.kind == SlotKind::indicator) {
    if (indicator_index_.size() < variables.size()) indicator_index_.resize(variables.size());
    auto& idx = indicator_index_[s.var];
    if (idx.empty()) idx.assign(card, -1);
    idx[s.state] = id;
  } else if (s.row >= 0) {
    if (parameter_index_.size() < variables.size()) parameter_index_.resize(variables.size());
    auto& idx = parameter_index_[s.var];
    if (idx.empty()) idx.assign(cpt_rows.at(s.var) * card, -1);
    idx[static_cast<std::size_t>(s.row) * card + s.state] = id;
  }
  return id;
}

int ArithmeticCircuit::add_leaf(int slot) {
  AcNode n;
  n.kind = AcKind::leaf;
  n.slot = slot;
  n.first = static_cast<std::uint32_t>(edges_.size());
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

int ArithmeticCircuit::add_constant(double c) {
  AcNode n;
  n.kind = AcKind::constant;
  n.constant = c;
  n.first = static_cast<std::uint32_t>(edges_.size());
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

int ArithmeticCircuit::add_node(AcKind kind, std::span<const int> kids) {
  AcNode n;
  n.kind = kind;
  n.first = static_cast<std::uint32_t>(edges_.size());
  n.count = static_cast<std::uint32_t>(kids.size());
  for (int k : kids) {
    if (k < 0 || k >= static_cast<int>(nodes_.size()))
      throw Error(ErrorKind::internal, "circuit child must precede its parent");
    edges_.push_back(k);
  }
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

int ArithmeticCircuit::indicator_slot(VarId v, StateId s) const {
  if (v < 0 || v >= static_cast<VarId>(indicator_index_.size())) return -1;
  const auto& idx = indicator_index_[v];
  return s >= 0 && s < static_cast<StateId>(idx.size()) ? idx[s] : -1;
}

int ArithmeticCircuit::parameter_slot(VarId cpt, int row, StateId s) const {
  if (cpt < 0 || cpt >= static_cast<VarId>(parameter_index_.size())) return -1;
  const auto& idx = parameter_index_[cpt];
  const std::size_t k = static_cast<std::size_t>(row) * variables[cpt].card() + s;
  return k < idx.size() ? idx[k] : -1;
}

std::optional<VarId> ArithmeticCircuit::find(std::string_view name) const {
  for (const auto& v : variables)
    if (v.name == name) return v.id;
  return std::nullopt;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Variable-set summaries: size plus two additive hashes. Sets below an Or are
// compared by summary and only expanded explicitly when they differ.
struct VarSummary {
  std::size_t size = 0;
  std::uint64_t h1 = 0;
  std::uint64_t h2 = 0;
  bool operator==(const VarSummary&) const = default;
};

class Extractor {
 public:
  Extractor(const DdnnfGraph& g, const WeightedCnf& cnf, ArithmeticCircuit& ac)
      : g_(g), cnf_(cnf), ac_(ac) {}

  void run(std::span<const int> universe) {
    slot_of_.assign(cnf_.num_vars + 1, -1);
    leaf_of_.assign(cnf_.num_vars + 1, -1);
    smooth_of_.assign(cnf_.num_vars + 1, -1);
    for (int b = 1; b <= cnf_.num_vars; ++b) {
      const BoolVarInfo& vi = cnf_.info[b];
      Slot s;
      if (vi.kind == VarKind::indicator) {
        s = {SlotKind::indicator, vi.var, -1, vi.state, 1.0};
      } else {
        s = {SlotKind::parameter, vi.kind == VarKind::parameter ? vi.var : -1, vi.row, vi.state,
             cnf_.weights[b]};
      }
      slot_of_[b] = ac_.add_slot(s);
    }
    zero_ = ac_.add_constant(0.0);
    one_ = ac_.add_constant(1.0);

    std::vector<int> root_kids;
    if (g_.root < 0) {
      ac_.root = zero_;
      return;
    }
    summarize();
    const int top = map_nodes();
    if (top == zero_) {
      ac_.root = zero_;
      return;
    }
    root_kids.push_back(top);
    std::vector<int> all(universe.begin(), universe.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    if (summary_[g_.root].size != all.size()) {
      const auto& below = explicit_set(g_.root);
      std::vector<int> missing;
      std::set_difference(all.begin(), all.end(), below.begin(), below.end(),
                          std::back_inserter(missing));
      for (int b : missing) root_kids.push_back(smooth(b));
    }
    for (int b = 1; b <= cnf_.num_vars; ++b)
      if (cnf_.fixed[b] > 0) root_kids.push_back(leaf(b));
    ac_.root = product(root_kids);
  }

 private:
  int leaf(int b) {
    if (leaf_of_[b] < 0) leaf_of_[b] = ac_.add_leaf(slot_of_[b]);
    return leaf_of_[b];
  }

  int smooth(int b) {
    if (smooth_of_[b] < 0) {
      int kids[2] = {leaf(b), one_};
      smooth_of_[b] = ac_.add_node(AcKind::sum, kids);
    }
    return smooth_of_[b];
  }

  int product(std::vector<int> kids) {
    std::vector<int> out;
    for (int k : kids) {
      if (k == zero_) return zero_;
      if (k != one_) out.push_back(k);
    }
    if (out.empty()) return one_;
    if (out.size() == 1) return out.front();
    return ac_.add_node(AcKind::product, out);
  }

  void summarize() {
    summary_.resize(g_.node_count());
    for (std::size_t i = 0; i < g_.node_count(); ++i) {
      const int id = static_cast<int>(i);
      const NnfNode& n = g_.node(id);
      VarSummary s;
      if (n.kind == NnfKind::literal) {
        const auto v = static_cast<std::uint64_t>(std::abs(n.lit));
        s = {1, mix(v), mix(v ^ 0x5bd1e995ull)};
      } else if (n.kind == NnfKind::and_node) {
        for (int k : g_.children(id)) {
          s.size += summary_[k].size;
          s.h1 += summary_[k].h1;
          s.h2 += summary_[k].h2;
        }
      } else if (n.kind == NnfKind::or_node) {
        auto kids = g_.children(id);
        bool same = std::all_of(kids.begin(), kids.end(),
                                [&](int k) { return summary_[k] == summary_[kids[0]]; });
        if (same) {
          s = summary_[kids[0]];
        } else {
          const auto& vars = explicit_set(id);
          s.size = vars.size();
          for (int v : vars) {
            s.h1 += mix(static_cast<std::uint64_t>(v));
            s.h2 += mix(static_cast<std::uint64_t>(v) ^ 0x5bd1e995ull);
          }
        }
      }
      summary_[i] = s;
    }
  }

  // Sorted variables below node `i`, memoized.
  const std::vector<int>& explicit_set(int i) {
    auto it = sets_.find(i);
    if (it != sets_.end()) return it->second;
    std::vector<std::pair<int, bool>> stack{{i, false}};
    while (!stack.empty()) {
      auto [x, done] = stack.back();
      stack.pop_back();
      if (sets_.count(x)) continue;
      const NnfNode& n = g_.node(x);
      if (n.kind == NnfKind::literal) {
        sets_[x] = {std::abs(n.lit)};
        continue;
      }
      auto kids = g_.children(x);
      if (!done) {
        stack.push_back({x, true});
        for (int k : kids)
          if (!sets_.count(k)) stack.push_back({k, false});
        continue;
      }
      std::vector<int> acc;
      for (int k : kids) {
        const auto& ks = sets_[k];
        std::vector<int> merged;
        std::set_union(acc.begin(), acc.end(), ks.begin(), ks.end(), std::back_inserter(merged));
        acc.swap(merged);
      }
      sets_[x] = std::move(acc);
    }
    return sets_[i];
  }

  int map_nodes() {
    std::vector<int> map(g_.node_count(), -1);
    for (std::size_t i = 0; i <= static_cast<std::size_t>(g_.root); ++i) {
      const int id = static_cast<int>(i);
      const NnfNode& n = g_.node(id);
      switch (n.kind) {
        case NnfKind::false_node: map[i] = zero_; break;
        case NnfKind::true_node: map[i] = one_; break;
        case NnfKind::literal: map[i] = n.lit > 0 ? leaf(n.lit) : one_; break;
        case NnfKind::and_node: {
          std::vector<int> kids;
          for (int k : g_.children(id)) kids.push_back(map[k]);
          map[i] = product(std::move(kids));
          break;
        }
        case NnfKind::or_node: {
          std::vector<int> terms;
          for (int k : g_.children(id)) {
            if (map[k] == zero_) continue;
            std::vector<int> factors{map[k]};
            if (summary_[k].size != summary_[id].size) {
              const auto& all = explicit_set(id);
              const auto& some = explicit_set(k);
              std::vector<int> missing;
              std::set_difference(all.begin(), all.end(), some.begin(), some.end(),
                                  std::back_inserter(missing));
              for (int b : missing) factors.push_back(smooth(b));
            }
            terms.push_back(product(std::move(factors)));
          }
          if (terms.empty()) map[i] = zero_;
          else if (terms.size() == 1) map[i] = terms.front();
          else map[i] = ac_.add_node(AcKind::sum, terms);
          break;
        }
      }
    }
    return map[g_.root];
  }

  const DdnnfGraph& g_;
  const WeightedCnf& cnf_;
  ArithmeticCircuit& ac_;
  std::vector<int> slot_of_, leaf_of_, smooth_of_;
  int zero_ = -1, one_ = -1;
  std::vector<VarSummary> summary_;
  std::unordered_map<int, std::vector<int>> sets_;
};

// Copy keeping only nodes reachable from the root.
ArithmeticCircuit compact(const ArithmeticCircuit& ac) {
  ArithmeticCircuit out;
  out.variables = ac.variables;
  out.active = ac.active;
  out.cpt_rows = ac.cpt_rows;
  out.learnable = ac.learnable;
  out.evidence_baked = ac.evidence_baked;
  for (const Slot& s : ac.slots()) out.add_slot(s);
  if (ac.root < 0) return out;
  std::vector<char> reach(ac.root + 1, 0);
  reach[ac.root] = 1;
  for (int i = ac.root; i >= 0; --i)
    if (reach[i])
      for (int k : ac.children(i)) reach[k] = 1;
  std::vector<int> map(ac.root + 1, -1);
  std::vector<int> kids;
  for (int i = 0; i <= ac.root; ++i) {
    if (!reach[i]) continue;
    const AcNode& n = ac.node(i);
    switch (n.kind) {
      case AcKind::leaf: map[i] = out.add_leaf(n.slot); break;
      case AcKind::constant: map[i] = out.add_constant(n.constant); break;
      default:
        kids.clear();
        for (int k : ac.children(i)) kids.push_back(map[k]);
        map[i] = out.add_node(n.kind, kids);
    }
  }
  out.root = map[ac.root];
  return out;
}

}  // namespace

ArithmeticCircuit extract(const DdnnfGraph& g, const WeightedCnf& cnf, const BayesianNetwork& net,
                          const std::vector<bool>& active, std::span<const int> universe) {
  ArithmeticCircuit ac;
  ac.variables = net.variables();
  ac.active = active;
  ac.active.resize(net.size(), false);
  for (VarId v = 0; v < net.size(); ++v) ac.cpt_rows.push_back(net.row_count(v));
  ac.learnable = net.learnable();
  Extractor(g, cnf, ac).run(universe);
  return compact(ac);
}

std::vector<double> slot_values(const ArithmeticCircuit& ac, const Evidence& extra,
                                const ParamTables& params) {
  if (!extra.constraints.empty())
    throw Error(ErrorKind::unsupported_query, "online evidence may only assign variables");
  std::vector<StateId> fixed(ac.variables.size(), -1);
  for (const auto& [v, s] : extra.assignments) {
    if (v < 0 || v >= static_cast<VarId>(ac.variables.size()))
      throw Error(ErrorKind::unsupported_query, "unknown variable id " + std::to_string(v));
    if (!ac.active[v])
      throw Error(ErrorKind::unsupported_query,
                  "variable " + ac.variables[v].name + " was pruned from this circuit");
    if (s < 0 || s >= ac.variables[v].card())
      throw Error(ErrorKind::unsupported_query, "bad state for variable " + ac.variables[v].name);
    fixed[v] = s;
  }
  const auto& slots = ac.slots();
  std::vector<double> out(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Slot& s = slots[i];
    if (s.kind == SlotKind::indicator) {
      out[i] = (s.var >= 0 && fixed[s.var] >= 0 && fixed[s.var] != s.state) ? 0.0 : 1.0;
    } else if (s.var >= 0 && static_cast<std::size_t>(s.var) < params.size() &&
               !params[s.var].empty()) {
      out[i] = params[s.var][static_cast<std::size_t>(s.row) * ac.variables[s.var].card() + s.state];
    } else {
      out[i] = s.value;
    }
  }
  return out;
}

template <class T>
T evaluate(const ArithmeticCircuit& ac, std::span<const T> slots, std::vector<T>& v) {
  if (ac.root < 0) return T(0);
  const std::size_t n = static_cast<std::size_t>(ac.root) + 1;
  v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AcNode& node = ac.node(static_cast<int>(i));
    switch (node.kind) {
      case AcKind::leaf: v[i] = slots[node.slot]; break;
      case AcKind::constant: v[i] = T(node.constant); break;
      case AcKind::sum: {
        T s = T(0);
        for (int k : ac.children(static_cast<int>(i))) s += v[k];
        v[i] = s;
        break;
      }
      case AcKind::product: {
        T p = T(1);
        for (int k : ac.children(static_cast<int>(i))) p *= v[k];
        v[i] = p;
        break;
      }
    }
  }
  return v[ac.root];
}

template <class T>
void differentiate(const ArithmeticCircuit& ac, std::span<const T> slots, std::vector<T>& v,
                   std::vector<T>& d, std::vector<T>& slot_partials) {
  slot_partials.assign(ac.slots().size(), T(0));
  if (ac.root < 0) return;
  evaluate<T>(ac, slots, v);
  const std::size_t n = static_cast<std::size_t>(ac.root) + 1;
  d.assign(n, T(0));
  d[ac.root] = T(1);
  std::vector<T> suffix;
  for (std::size_t i = n; i-- > 0;) {
    const T di = d[i];
    if (di == T(0)) continue;
    const AcNode& node = ac.node(static_cast<int>(i));
    auto kids = ac.children(static_cast<int>(i));
    switch (node.kind) {
      case AcKind::leaf: slot_partials[node.slot] += di; break;
      case AcKind::constant: break;
      case AcKind::sum:
        for (int k : kids) d[k] += di;
        break;
      case AcKind::product: {
        // Prefix and suffix products keep this exact when some child is zero.
        const std::size_t c = kids.size();
        suffix.resize(c + 1);
        suffix[c] = T(1);
        for (std::size_t j = c; j-- > 0;) suffix[j] = suffix[j + 1] * v[kids[j]];
        T prefix = T(1);
        for (std::size_t j = 0; j < c; ++j) {
          d[kids[j]] += di * prefix * suffix[j + 1];
          prefix *= v[kids[j]];
        }
        break;
      }
    }
  }
}

template double evaluate<double>(const ArithmeticCircuit&, std::span<const double>,
                                 std::vector<double>&);
template long double evaluate<long double>(const ArithmeticCircuit&, std::span<const long double>,
                                           std::vector<long double>&);
template void differentiate<double>(const ArithmeticCircuit&, std::span<const double>,
                                    std::vector<double>&, std::vector<double>&,
                                    std::vector<double>&);
template void differentiate<long double>(const ArithmeticCircuit&, std::span<const long double>,
                                         std::vector<long double>&, std::vector<long double>&,
                                         std::vector<long double>&);

double evaluate(const ArithmeticCircuit& ac, const Evidence& extra, const ParamTables& params) {
  auto slots = slot_values(ac, extra, params);
  std::vector<double> scratch;
  return evaluate<double>(ac, slots, scratch);
}

EvalResult differentiate(const ArithmeticCircuit& ac, const Evidence& extra,
                         const ParamTables& params) {
  EvalResult r;
  r.slot_values = slot_values(ac, extra, params);
  std::vector<double> v, d;
  differentiate<double>(ac, r.slot_values, v, d, r.partials);
  r.value = ac.root < 0 ? 0.0 : v[ac.root];
  return r;
}

std::vector<std::vector<double>> variable_marginals(const ArithmeticCircuit& ac,
                                                    const EvalResult& r) {
  if (!(r.value > 0.0))
    throw Error(ErrorKind::inconsistent_evidence, "evidence has probability zero");
  std::vector<std::vector<double>> out(ac.variables.size());
  for (VarId v = 0; v < static_cast<VarId>(ac.variables.size()); ++v) {
    if (!ac.active[v]) continue;
    out[v].assign(ac.variables[v].card(), 0.0);
    for (StateId s = 0; s < ac.variables[v].card(); ++s) {
      int slot = ac.indicator_slot(v, s);
      if (slot >= 0) out[v][s] = r.slot_values[slot] * r.partials[slot] / r.value;
    }
  }
  return out;
}

std::vector<std::vector<double>> variable_marginals(const ArithmeticCircuit& ac,
                                                    const Evidence& extra,
                                                    const ParamTables& params) {
  return variable_marginals(ac, differentiate(ac, extra, params));
}

std::vector<double> family_marginals(const ArithmeticCircuit& ac, const EvalResult& r, VarId cpt) {
  if (cpt < 0 || cpt >= static_cast<VarId>(ac.variables.size()) || !ac.learnable.count(cpt))
    throw Error(ErrorKind::unsupported_query, "family marginals need a learnable CPT");
  if (!ac.active[cpt])
    throw Error(ErrorKind::unsupported_query,
                "variable " + ac.variables[cpt].name + " was pruned from this circuit");
  if (!(r.value > 0.0))
    throw Error(ErrorKind::inconsistent_evidence, "evidence has probability zero");
  const int card = ac.variables[cpt].card();
  std::vector<double> out(ac.cpt_rows[cpt] * card, 0.0);
  for (std::size_t row = 0; row < ac.cpt_rows[cpt]; ++row)
    for (StateId s = 0; s < card; ++s) {
      int slot = ac.parameter_slot(cpt, static_cast<int>(row), s);
      if (slot >= 0) out[row * card + s] = r.slot_values[slot] * r.partials[slot] / r.value;
    }
  return out;
}

std::vector<double> family_marginals(const ArithmeticCircuit& ac, const Evidence& extra,
                                     const ParamTables& params, VarId cpt) {
  return family_marginals(ac, differentiate(ac, extra, params), cpt);
}

std::vector<double> evaluate_batch(const ArithmeticCircuit& ac,
                                   std::span<const std::vector<double>> slot_sets, Exec exec) {
  const long n = static_cast<long>(slot_sets.size());
  std::vector<double> out(slot_sets.size());
  if (exec == Exec::serial) {
    std::vector<double> scratch;
    for (long i = 0; i < n; ++i) out[i] = evaluate<double>(ac, slot_sets[i], scratch);
    return out;
  }
#pragma omp parallel
  {
    std::vector<double> scratch;
#pragma omp for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) out[i] = evaluate<double>(ac, slot_sets[i], scratch);
  }
  return out;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_ac(const ArithmeticCircuit& ac, std::ostream& out) {
  out << "ac " << ac.node_count() << ' ' << ac.edge_count() << ' ' << ac.slots().size() << ' '
      << ac.variables.size() << ' ' << ac.root << '\n';
  for (const auto& v : ac.variables) {
    out << "var " << v.id << ' ' << (ac.active[v.id] ? 1 : 0) << ' ' << ac.cpt_rows[v.id] << ' '
        << (ac.learnable.count(v.id) ? 1 : 0) << ' ' << v.name;
    for (const auto& s : v.states) out << ' ' << s;
    out << '\n';
  }
  for (const auto& [v, s] : ac.evidence_baked.assignments) out << "evidence " << v << ' ' << s << '\n';
  for (const auto& c : ac.evidence_baked.constraints) {
    out << "constraint " << c.size();
    for (const Atom& a : c) out << ' ' << a.var << ' ' << a.state;
    out << '\n';
  }
  for (const Slot& s : ac.slots()) {
    if (s.kind == SlotKind::indicator)
      out << "slot i " << s.var << ' ' << s.state << ' ' << fmt(s.value) << '\n';
    else
      out << "slot p " << s.var << ' ' << s.row << ' ' << s.state << ' ' << fmt(s.value) << '\n';
  }
  for (std::size_t i = 0; i < ac.node_count(); ++i) {
    const AcNode& n = ac.node(static_cast<int>(i));
    switch (n.kind) {
      case AcKind::leaf: out << "L " << n.slot << '\n'; continue;
      case AcKind::constant: out << "C " << fmt(n.constant) << '\n'; continue;
      case AcKind::sum: out << "S " << n.count; break;
      case AcKind::product: out << "P " << n.count; break;
    }
    for (int k : ac.children(static_cast<int>(i))) out << ' ' << k;
    out << '\n';
  }
}

ArithmeticCircuit read_ac(std::istream& in) {
  ArithmeticCircuit ac;
  std::string line;
  int line_no = 0;
  std::size_t nodes = 0, edges = 0, slots = 0, vars = 0;
  bool header = false;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (!header) {
      if (tag != "ac" || !(ss >> nodes >> edges >> slots >> vars >> ac.root)) fail("expected ac header");
      header = true;
      continue;
    }
    if (tag == "var") {
      Variable v;
      int active = 0, learn = 0;
      std::size_t rows = 0;
      if (!(ss >> v.id >> active >> rows >> learn >> v.name)) fail("bad var line");
      if (v.id != static_cast<VarId>(ac.variables.size())) fail("var ids must be dense");
      std::string st;
      while (ss >> st) v.states.push_back(st);
      if (v.states.empty()) fail("variable without states");
      ac.variables.push_back(v);
      ac.active.push_back(active != 0);
      ac.cpt_rows.push_back(rows);
      if (learn) ac.learnable.insert(v.id);
    } else if (tag == "evidence") {
      VarId v;
      StateId s;
      if (!(ss >> v >> s)) fail("bad evidence line");
      ac.evidence_baked.assignments[v] = s;
    } else if (tag == "constraint") {
      std::size_t k;
      if (!(ss >> k)) fail("bad constraint line");
      std::vector<Atom> c(k);
      for (auto& a : c)
        if (!(ss >> a.var >> a.state)) fail("bad constraint atom");
      ac.evidence_baked.constraints.push_back(std::move(c));
    } else if (tag == "slot") {
      std::string kind, value;
      Slot s;
      if (!(ss >> kind)) fail("bad slot line");
      if (kind == "i") {
        s.kind = SlotKind::indicator;
        if (!(ss >> s.var >> s.state >> value)) fail("bad indicator slot");
      } else if (kind == "p") {
        s.kind = SlotKind::parameter;
        if (!(ss >> s.var >> s.row >> s.state >> value)) fail("bad parameter slot");
      } else {
        fail("unknown slot kind");
      }
      s.value = std::strtod(value.c_str(), nullptr);
      ac.add_slot(s);
    } else if (tag == "L") {
      int slot;
      if (!(ss >> slot) || slot < 0 || slot >= static_cast<int>(ac.slots().size())) fail("bad leaf");
      ac.add_leaf(slot);
    } else if (tag == "C") {
      std::string value;
      if (!(ss >> value)) fail("bad constant");
      ac.add_constant(std::strtod(value.c_str(), nullptr));
    } else if (tag == "S" || tag == "P") {
      std::size_t k;
      if (!(ss >> k)) fail("bad node line");
      std::vector<int> kids(k);
      for (auto& c : kids)
        if (!(ss >> c) || c < 0 || c >= static_cast<int>(ac.node_count())) fail("bad child index");
      ac.add_node(tag == "S" ? AcKind::sum : AcKind::product, kids);
    } else {
      fail("unknown record " + tag);
    }
  }
  if (!header) throw Error(ErrorKind::parse, "line 1: missing ac header");
  if (ac.node_count() != nodes || ac.edge_count() != edges || ac.slots().size() != slots ||
      ac.variables.size() != vars)
    fail("counts do not match header");
  if (ac.root < -1 || ac.root >= static_cast<int>(ac.node_count())) fail("bad root");
  return ac;
}

}  // namespace bnac
