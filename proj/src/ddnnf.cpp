#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "bnac/compiler.hpp"

namespace bnac {

int DdnnfGraph::add(NnfKind kind, int lit, std::span<const int> kids) {
  NnfNode n;
  n.kind = kind;
  n.lit = lit;
  n.first = static_cast<std::uint32_t>(edges_.size());
  n.count = static_cast<std::uint32_t>(kids.size());
  for (int k : kids) {
    if (k < 0 || k >= static_cast<int>(nodes_.size()))
      throw Error(ErrorKind::internal, "d-DNNF child must precede its parent");
    edges_.push_back(k);
  }
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

std::vector<std::vector<int>> node_variables(const DdnnfGraph& g) {
  std::vector<std::vector<int>> vars(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const NnfNode& n = g.node(static_cast<int>(i));
    if (n.kind == NnfKind::literal) {
      vars[i] = {std::abs(n.lit)};
      continue;
    }
    std::vector<int> acc;
    for (int k : g.children(static_cast<int>(i))) {
      std::vector<int> merged;
      std::set_union(acc.begin(), acc.end(), vars[k].begin(), vars[k].end(),
                     std::back_inserter(merged));
      acc.swap(merged);
    }
    vars[i] = std::move(acc);
  }
  return vars;
}

double ddnnf_weighted_count(const DdnnfGraph& g, std::span<const double> weights,
                            std::span<const int> universe) {
  if (g.root < 0) return 0.0;
  const auto vars = node_variables(g);
  auto missing = [&](const std::vector<int>& all, const std::vector<int>& some) {
    double f = 1.0;
    std::vector<int> diff;
    std::set_difference(all.begin(), all.end(), some.begin(), some.end(), std::back_inserter(diff));
    for (int v : diff) f *= 1.0 + weights[v];
    return f;
  };
  std::vector<double> val(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const int id = static_cast<int>(i);
    const NnfNode& n = g.node(id);
    switch (n.kind) {
      case NnfKind::false_node: val[i] = 0.0; break;
      case NnfKind::true_node: val[i] = 1.0; break;
      case NnfKind::literal: val[i] = n.lit > 0 ? weights[n.lit] : 1.0; break;
      case NnfKind::and_node: {
        double p = 1.0;
        for (int k : g.children(id)) p *= val[k];
        val[i] = p;
        break;
      }
      case NnfKind::or_node: {
        double s = 0.0;
        for (int k : g.children(id)) s += val[k] * missing(vars[i], vars[k]);
        val[i] = s;
        break;
      }
    }
  }
  std::vector<int> all(universe.begin(), universe.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return val[g.root] * missing(all, vars[g.root]);
}

double ddnnf_model_count(const DdnnfGraph& g, std::span<const int> universe) {
  std::vector<double> ones(g.num_vars + 1, 1.0);
  for (int v : universe)
    if (v >= static_cast<int>(ones.size())) ones.resize(v + 1, 1.0);
  return ddnnf_weighted_count(g, ones, universe);
}

namespace {

// True when every model of node `i` sets the literal `lit`.
bool entails(const DdnnfGraph& g, int i, Lit lit, std::map<int, bool>& memo) {
  auto it = memo.find(i);
  if (it != memo.end()) return it->second;
  const NnfNode& n = g.node(i);
  bool r = false;
  switch (n.kind) {
    case NnfKind::false_node: r = true; break;
    case NnfKind::true_node: r = false; break;
    case NnfKind::literal: r = n.lit == lit; break;
    case NnfKind::and_node:
      for (int k : g.children(i))
        if (entails(g, k, lit, memo)) {
          r = true;
          break;
        }
      break;
    case NnfKind::or_node: {
      auto kids = g.children(i);
      r = !kids.empty();
      for (int k : kids)
        if (!entails(g, k, lit, memo)) {
          r = false;
          break;
        }
      break;
    }
  }
  memo.emplace(i, r);
  return r;
}

}  // namespace

VerifyReport verify_ddnnf(const DdnnfGraph& g, const WeightedCnf& cnf, int count_bound) {
  VerifyReport rep;
  const auto vars = node_variables(g);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const int id = static_cast<int>(i);
    const NnfNode& n = g.node(id);
    auto kids = g.children(id);
    if (n.kind == NnfKind::and_node) {
      std::vector<int> seen;
      bool overlap = false;
      for (int k : kids) {
        std::vector<int> common;
        std::set_intersection(seen.begin(), seen.end(), vars[k].begin(), vars[k].end(),
                              std::back_inserter(common));
        if (!common.empty()) overlap = true;
        std::vector<int> merged;
        std::set_union(seen.begin(), seen.end(), vars[k].begin(), vars[k].end(),
                       std::back_inserter(merged));
        seen.swap(merged);
      }
      if (overlap) ++rep.decomposability_violations;
    } else if (n.kind == NnfKind::or_node) {
      bool ok = kids.size() == 2 && n.lit > 0;
      if (ok) {
        std::map<int, bool> pos, neg;
        ok = (entails(g, kids[0], n.lit, pos) && entails(g, kids[1], -n.lit, neg)) ||
             (entails(g, kids[1], n.lit, pos) && entails(g, kids[0], -n.lit, neg));
      }
      if (!ok) ++rep.determinism_violations;
    }
  }
  const auto free = cnf.free_vars();
  if (static_cast<int>(free.size()) <= count_bound) {
    WeightedCnf unit = cnf;
    std::fill(unit.weights.begin(), unit.weights.end(), 1.0);
    unit.prefactor = 1.0;
    rep.cnf_count = weighted_model_count_oracle(unit, count_bound);
    rep.graph_count = ddnnf_model_count(g, free);
    rep.counted = true;
  }
  return rep;
}

void write_nnf(const DdnnfGraph& g, std::ostream& out) {
  // Nodes after the root are unreachable; the reader takes the last node as root.
  const std::size_t n_out = g.root < 0 ? 0 : static_cast<std::size_t>(g.root) + 1;
  std::size_t e_out = 0;
  for (std::size_t i = 0; i < n_out; ++i) e_out += g.node(static_cast<int>(i)).count;
  out << "nnf " << n_out << ' ' << e_out << ' ' << g.num_vars << '\n';
  for (std::size_t i = 0; i < n_out; ++i) {
    const int id = static_cast<int>(i);
    const NnfNode& n = g.node(id);
    auto kids = g.children(id);
    switch (n.kind) {
      case NnfKind::false_node: out << "O 0 0\n"; continue;
      case NnfKind::true_node: out << "A 0\n"; continue;
      case NnfKind::literal: out << "L " << n.lit << '\n'; continue;
      case NnfKind::and_node: out << "A " << kids.size(); break;
      case NnfKind::or_node: out << "O " << n.lit << ' ' << kids.size(); break;
    }
    for (int k : kids) out << ' ' << k;
    out << '\n';
  }
}

DdnnfGraph read_nnf(std::istream& in) {
  DdnnfGraph g;
  std::string line;
  int line_no = 0;
  std::size_t nodes = 0, edges = 0;
  bool header = false;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag == "c") continue;
    if (!header) {
      if (tag != "nnf" || !(ss >> nodes >> edges >> g.num_vars)) fail("expected nnf header");
      header = true;
      continue;
    }
    std::vector<int> kids;
    if (tag == "L") {
      int lit = 0;
      if (!(ss >> lit) || lit == 0) fail("bad literal");
      g.add(NnfKind::literal, lit, kids);
      continue;
    }
    int dec = 0;
    std::size_t count = 0;
    if (tag == "O" && !(ss >> dec)) fail("bad or node");
    if ((tag != "A" && tag != "O") || !(ss >> count)) fail("unknown node record");
    for (std::size_t k = 0; k < count; ++k) {
      int c;
      if (!(ss >> c) || c < 0 || c >= static_cast<int>(g.node_count())) fail("bad child index");
      kids.push_back(c);
    }
    NnfKind kind = tag == "A" ? (count == 0 ? NnfKind::true_node : NnfKind::and_node)
                              : (count == 0 ? NnfKind::false_node : NnfKind::or_node);
    g.add(kind, dec, kids);
  }
  if (!header) throw Error(ErrorKind::parse, "line 1: missing nnf header");
  if (g.node_count() != nodes || g.edge_count() != edges) fail("counts do not match header");
  g.root = g.node_count() == 0 ? -1 : static_cast<int>(g.node_count()) - 1;
  return g;
}

}  // namespace bnac
