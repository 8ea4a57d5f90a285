#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>

#include "bnac/compiler.hpp"

namespace bnac {

int Dtree::width() const {
  std::size_t w = 0;
  for (const auto& s : separator) w = std::max(w, s.size());
  return static_cast<int>(w);
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

}  // namespace

Dtree build_dtree(const WeightedCnf& cnf, const std::vector<int>& order) {
  Dtree t;
  std::vector<int> clauses;
  for (std::size_t c = 0; c < cnf.clauses.size(); ++c)
    if (!cnf.clauses[c].empty()) clauses.push_back(static_cast<int>(c));
  t.position.assign(cnf.num_vars + 1, -1);
  int pos = 0;
  for (int v : order)
    if (v >= 1 && v <= cnf.num_vars && t.position[v] < 0) t.position[v] = pos++;
  std::vector<int> full_order(order.begin(), order.end());
  for (int v = 1; v <= cnf.num_vars; ++v)
    if (t.position[v] < 0) {
      t.position[v] = pos++;
      full_order.push_back(v);
    }
  if (clauses.empty()) return t;

  const int m = static_cast<int>(clauses.size());
  std::vector<std::vector<int>> occ(cnf.num_vars + 1);
  for (int i = 0; i < m; ++i)
    for (Lit l : cnf.clauses[clauses[i]]) {
      auto& o = occ[std::abs(l)];
      if (o.empty() || o.back() != i) o.push_back(i);
    }

  for (int i = 0; i < m; ++i) {
    DtreeNode leaf;
    leaf.clause = clauses[i];
    t.nodes.push_back(leaf);
  }
  UnionFind uf(m);
  std::vector<int> tree_of(m);
  std::iota(tree_of.begin(), tree_of.end(), 0);

  auto compose = [&](std::vector<int> trees) {
    // Pairwise rounds keep the composed subtree balanced.
    while (trees.size() > 1) {
      std::vector<int> next;
      for (std::size_t i = 0; i + 1 < trees.size(); i += 2) {
        DtreeNode n;
        n.left = trees[i];
        n.right = trees[i + 1];
        int id = static_cast<int>(t.nodes.size());
        t.nodes[n.left].parent = id;
        t.nodes[n.right].parent = id;
        t.nodes.push_back(n);
        next.push_back(id);
      }
      if (trees.size() % 2) next.push_back(trees.back());
      trees.swap(next);
    }
    return trees.front();
  };

  for (int v : full_order) {
    std::vector<int> reps;
    for (int i : occ[v]) {
      int r = uf.find(i);
      if (std::find(reps.begin(), reps.end(), r) == reps.end()) reps.push_back(r);
    }
    if (reps.size() < 2) continue;
    std::vector<int> trees;
    for (int r : reps) trees.push_back(tree_of[r]);
    int root = compose(trees);
    for (std::size_t i = 1; i < reps.size(); ++i) uf.parent[reps[i]] = reps[0];
    tree_of[reps[0]] = root;
  }
  std::vector<int> rest;
  for (int i = 0; i < m; ++i)
    if (uf.find(i) == i) rest.push_back(tree_of[i]);
  t.root = compose(rest);

  // Number leaves left to right and record subtree ranges.
  const int total = static_cast<int>(t.nodes.size());
  std::vector<int> stack{t.root};
  std::vector<char> expanded(total, 0);
  while (!stack.empty()) {
    int x = stack.back();
    DtreeNode& n = t.nodes[x];
    if (n.is_leaf()) {
      n.begin = static_cast<int>(t.leaf_clauses.size());
      t.leaf_clauses.push_back(n.clause);
      n.end = n.begin + 1;
      stack.pop_back();
    } else if (!expanded[x]) {
      expanded[x] = 1;
      stack.push_back(n.right);
      stack.push_back(n.left);
    } else {
      n.begin = t.nodes[n.left].begin;
      n.end = t.nodes[n.right].end;
      stack.pop_back();
    }
  }

  // A variable is in the context of every node strictly between one of its
  // leaves and the lowest common ancestor of all its leaves.
  std::vector<int> leaf_at(m);
  for (int x = 0; x < m; ++x) leaf_at[t.nodes[x].begin] = x;
  std::vector<int> position_of_clause(cnf.clauses.size(), -1);
  for (int p = 0; p < m; ++p) position_of_clause[t.leaf_clauses[p]] = p;
  t.separator.assign(total, {});
  t.context.assign(total, {});
  std::vector<int> stamp(total, 0);
  for (int v = 1; v <= cnf.num_vars; ++v) {
    if (occ[v].size() < 2) continue;
    int lo = m, hi = -1;
    for (int i : occ[v]) {
      int p = position_of_clause[clauses[i]];
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    int lca = leaf_at[lo];
    while (!(t.nodes[lca].begin <= lo && t.nodes[lca].end > hi)) lca = t.nodes[lca].parent;
    for (int i : occ[v]) {
      int x = leaf_at[position_of_clause[clauses[i]]];
      while (x != lca && stamp[x] != v) {
        stamp[x] = v;
        t.context[x].push_back(v);
        x = t.nodes[x].parent;
      }
    }
  }
  for (int x = 0; x < total; ++x) {
    const DtreeNode& n = t.nodes[x];
    if (n.is_leaf()) continue;
    const auto& a = t.context[n.left];
    const auto& b = t.context[n.right];
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(t.separator[x]));
  }
  return t;
}

}  // namespace bnac
