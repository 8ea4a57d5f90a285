#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "bnac/compiler.hpp"
#include "bnac/model.hpp"

namespace bnac {

namespace {

bool contains(const std::vector<int>& sorted, int x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

void insert_sorted(std::vector<int>& sorted, int x) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  if (it == sorted.end() || *it != x) sorted.insert(it, x);
}

void erase_sorted(std::vector<int>& sorted, int x) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  if (it != sorted.end() && *it == x) sorted.erase(it);
}

}  // namespace

void InteractionGraph::add_edge(int a, int b) {
  if (a == b) return;
  insert_sorted(adj[a], b);
  insert_sorted(adj[b], a);
}

InteractionGraph InteractionGraph::from_cnf(const WeightedCnf& cnf) {
  InteractionGraph g;
  g.adj.resize(cnf.num_vars);
  g.log_size.assign(cnf.num_vars, 1.0);
  for (const auto& clause : cnf.clauses)
    for (std::size_t i = 0; i < clause.size(); ++i)
      for (std::size_t j = i + 1; j < clause.size(); ++j) {
        int a = std::abs(clause[i]) - 1, b = std::abs(clause[j]) - 1;
        if (a == b) continue;
        g.adj[a].push_back(b);
        g.adj[b].push_back(a);
      }
  for (auto& a : g.adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return g;
}

InteractionGraph InteractionGraph::from_network(const BayesianNetwork& net) {
  InteractionGraph g;
  g.adj.resize(net.size());
  for (const auto& v : net.variables()) g.log_size.push_back(std::log2(std::max(1, v.card())));
  for (const auto& c : net.cpts()) {
    for (std::size_t i = 0; i < c.parents.size(); ++i) {
      g.add_edge(c.child, c.parents[i]);
      for (std::size_t j = i + 1; j < c.parents.size(); ++j) g.add_edge(c.parents[i], c.parents[j]);
    }
  }
  return g;
}

MinfillResult minfill_order(const InteractionGraph& graph, std::uint64_t seed) {
  const int n = graph.size();
  // Ties go to the lowest rank; rank is the node id unless a seed shuffles it.
  std::vector<int> rank(n);
  for (int v = 0; v < n; ++v) rank[v] = v;
  if (seed != 0) {
    std::vector<int> perm(rank);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
    for (int i = 0; i < n; ++i) rank[perm[i]] = i;
  }
  std::vector<std::vector<int>> adj = graph.adj;
  std::vector<long long> fill(n, 0);
  std::vector<bool> done(n, false);

  auto fill_of = [&](int v) {
    long long f = 0;
    const auto& nb = adj[v];
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j)
        if (!contains(adj[nb[i]], nb[j])) ++f;
    return f;
  };

  std::set<std::pair<long long, int>> queue;
  for (int v = 0; v < n; ++v) {
    fill[v] = fill_of(v);
    queue.emplace(fill[v], rank[v]);
  }
  std::vector<int> node_of(n);
  for (int v = 0; v < n; ++v) node_of[rank[v]] = v;

  MinfillResult res;
  res.order.reserve(n);
  std::vector<int> touched;
  std::vector<char> in_touched(n, 0);
  auto touch = [&](int u) {
    if (!done[u] && !in_touched[u]) {
      in_touched[u] = 1;
      touched.push_back(u);
    }
  };

  while (!queue.empty()) {
    const int v = node_of[queue.begin()->second];
    queue.erase(queue.begin());
    done[v] = true;
    res.order.push_back(v);

    const std::vector<int> nb = adj[v];
    double cluster = graph.log_size[v];
    for (int u : nb) cluster += graph.log_size[u];
    res.max_cluster = std::max(res.max_cluster, cluster);

    touched.clear();
    for (int u : nb) {
      erase_sorted(adj[u], v);
      touch(u);
    }
    adj[v].clear();
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        const int a = nb[i], b = nb[j];
        if (contains(adj[a], b)) continue;
        insert_sorted(adj[a], b);
        insert_sorted(adj[b], a);
        // Common neighbors of a new edge lose one missing pair.
        const auto& la = adj[a];
        const auto& lb = adj[b];
        std::size_t x = 0, y = 0;
        while (x < la.size() && y < lb.size()) {
          if (la[x] < lb[y]) {
            ++x;
          } else if (lb[y] < la[x]) {
            ++y;
          } else {
            touch(la[x]);
            ++x;
            ++y;
          }
        }
      }
    for (int u : touched) {
      in_touched[u] = 0;
      long long f = fill_of(u);
      if (f != fill[u]) {
        queue.erase({fill[u], rank[u]});
        fill[u] = f;
        queue.emplace(f, rank[u]);
      }
    }
  }
  return res;
}

}  // namespace bnac
