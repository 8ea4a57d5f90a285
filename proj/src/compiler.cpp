#include <pthread.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <unordered_map>

#include "bnac/compiler.hpp"

namespace bnac {

namespace {

struct VectorHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (std::uint64_t x : v) {
      h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdull;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Hash-consed node construction with light simplification.
class Builder {
 public:
  Builder(DdnnfGraph& g, std::size_t budget) : g_(g), budget_(budget) {
    false_ = make(NnfKind::false_node, 0, {});
    true_ = make(NnfKind::true_node, 0, {});
  }

  int false_node() const { return false_; }
  int true_node() const { return true_; }

  int literal(Lit l) {
    auto it = lits_.find(l);
    if (it != lits_.end()) return it->second;
    int id = make(NnfKind::literal, l, {});
    lits_.emplace(l, id);
    return id;
  }

  int conjoin(std::vector<int> kids) {
    std::vector<int> out;
    out.reserve(kids.size());
    for (int k : kids) {
      if (k == false_) return false_;
      if (k == true_) continue;
      out.push_back(k);
    }
    if (out.empty()) return true_;
    if (out.size() == 1) return out.front();
    std::sort(out.begin(), out.end());
    return make(NnfKind::and_node, 0, out);
  }

  // Deterministic choice on variable v between `high` (v true) and `low`.
  int decide(int v, int high, int low) {
    if (high == false_) return low;
    if (low == false_) return high;
    return make(NnfKind::or_node, v, {high, low});
  }

 private:
  int make(NnfKind kind, int lit, std::vector<int> kids) {
    std::vector<std::uint64_t> key;
    key.reserve(kids.size() + 1);
    key.push_back((static_cast<std::uint64_t>(kind) << 32) ^ static_cast<std::uint32_t>(lit));
    for (int k : kids) key.push_back(static_cast<std::uint64_t>(k));
    auto it = unique_.find(key);
    if (it != unique_.end()) return it->second;
    if (g_.edge_count() + kids.size() > budget_)
      throw Error(ErrorKind::budget_exceeded,
                  "d-DNNF exceeded the node budget of " + std::to_string(budget_) + " edges");
    int id = g_.add(kind, lit, kids);
    unique_.emplace(std::move(key), id);
    return id;
  }

  DdnnfGraph& g_;
  std::size_t budget_;
  int false_ = -1;
  int true_ = -1;
  std::unordered_map<Lit, int> lits_;
  std::unordered_map<std::vector<std::uint64_t>, int, VectorHash> unique_;
};

class Engine {
 public:
  Engine(const WeightedCnf& cnf, const Dtree& dtree, const CompileOptions& opts, CompileResult& out)
      : cnf_(cnf), dt_(dtree), opts_(opts), out_(out), build_(out.graph, opts.node_budget) {
    out_.graph.num_vars = cnf.num_vars;
    value_.assign(cnf.num_vars + 1, 0);
    for (int v = 1; v <= cnf.num_vars; ++v) value_[v] = cnf.fixed[v];
    watches_.resize(2 * (cnf.num_vars + 1));
    occ_.resize(cnf.num_vars + 1);
    cache_.resize(dtree.nodes.size());
    // Decisions prefer indicators, then lower ids.
    for (std::size_t x = 0; x < dtree.nodes.size(); ++x) {
      std::vector<int> sep = dtree.separator[x];
      std::stable_sort(sep.begin(), sep.end(), [&](int a, int b) {
        return is_indicator(a) && !is_indicator(b);
      });
      sep_.push_back(std::move(sep));
    }
    // Clauses below each node that mention its context, with those literals.
    boundary_.resize(dtree.nodes.size());
    for (std::size_t x = 0; x < dtree.nodes.size(); ++x) {
      const auto& ctx = dtree.context[x];
      if (ctx.empty()) continue;
      const DtreeNode& node = dtree.nodes[x];
      for (int k = node.begin; k < node.end; ++k) {
        std::vector<Lit> lits;
        for (Lit l : cnf.clauses[dtree.leaf_clauses[k]])
          if (std::binary_search(ctx.begin(), ctx.end(), std::abs(l))) lits.push_back(l);
        if (!lits.empty()) boundary_[x].push_back(std::move(lits));
      }
    }
  }

  int run() {
    std::vector<Lit> units;
    bool conflict = false;
    for (std::size_t c = 0; c < cnf_.clauses.size(); ++c) {
      std::vector<Lit> lits = cnf_.clauses[c];
      if (lits.empty()) {
        conflict = true;
        continue;
      }
      // Order true, then open, then false literals so watches start sensible.
      std::stable_sort(lits.begin(), lits.end(), [&](Lit a, Lit b) { return rank(a) < rank(b); });
      int ci = static_cast<int>(start_.size());
      start_.push_back(static_cast<int>(lits_.size()));
      size_.push_back(static_cast<int>(lits.size()));
      lits_.insert(lits_.end(), lits.begin(), lits.end());
      for (Lit l : lits) occ_[std::abs(l)].push_back(ci);
      if (truth(lits[0]) > 0) {
        watch(ci, 0);
        if (lits.size() > 1) watch(ci, 1);
        continue;
      }
      if (truth(lits[0]) < 0) {
        conflict = true;
        continue;
      }
      if (lits.size() == 1 || truth(lits[1]) < 0) units.push_back(lits[0]);
      watch(ci, 0);
      if (lits.size() > 1) watch(ci, 1);
    }
    if (conflict) return build_.false_node();
    for (Lit l : units)
      if (!assign(l)) return build_.false_node();
    if (!propagate()) return build_.false_node();

    std::vector<int> kids;
    for (Lit l : trail_) kids.push_back(build_.literal(l));
    if (!dt_.empty()) kids.push_back(compile_node(dt_.root));
    return build_.conjoin(std::move(kids));
  }

 private:
  bool is_indicator(int v) const {
    return static_cast<std::size_t>(v) < cnf_.info.size() && cnf_.info[v].kind == VarKind::indicator;
  }

  int truth(Lit l) const {
    std::int8_t a = value_[std::abs(l)];
    return a == 0 ? 0 : ((a > 0) == (l > 0) ? 1 : -1);
  }

  int rank(Lit l) const {
    int t = truth(l);
    return t > 0 ? 0 : (t == 0 ? 1 : 2);
  }

  static std::size_t index(Lit l) { return 2 * static_cast<std::size_t>(std::abs(l)) + (l < 0); }

  void watch(int c, int slot) { watches_[index(lits_[start_[c] + slot])].push_back(c); }

  bool assign(Lit l) {
    int t = truth(l);
    if (t > 0) return true;
    if (t < 0) return false;
    value_[std::abs(l)] = l > 0 ? 1 : -1;
    trail_.push_back(l);
    return true;
  }

  bool propagate() {
    while (qhead_ < trail_.size()) {
      const Lit f = -trail_[qhead_++];  // literal that just became false
      auto& ws = watches_[index(f)];
      std::size_t keep = 0;
      bool ok = true;
      for (std::size_t i = 0; i < ws.size(); ++i) {
        const int c = ws[i];
        if (!ok) {
          ws[keep++] = c;
          continue;
        }
        Lit* cl = lits_.data() + start_[c];
        const int n = size_[c];
        if (n == 1) {
          ws[keep++] = c;
          ok = false;
          continue;
        }
        if (cl[0] == f) std::swap(cl[0], cl[1]);
        if (truth(cl[0]) > 0) {
          ws[keep++] = c;
          continue;
        }
        int k = 2;
        while (k < n && truth(cl[k]) < 0) ++k;
        if (k < n) {
          std::swap(cl[1], cl[k]);
          watches_[index(cl[1])].push_back(c);
          continue;
        }
        ws[keep++] = c;
        if (!assign(cl[0])) ok = false;
      }
      ws.resize(keep);
      if (!ok) {
        qhead_ = trail_.size();
        return false;
      }
    }
    return true;
  }

  void backtrack(std::size_t level) {
    while (trail_.size() > level) {
      value_[std::abs(trail_.back())] = 0;
      trail_.pop_back();
    }
    qhead_ = level;
  }

  bool satisfied(int c) const {
    const Lit* cl = lits_.data() + start_[c];
    for (int k = 0; k < size_[c]; ++k)
      if (truth(cl[k]) > 0) return true;
    return false;
  }

  // An unassigned variable all of whose clauses are satisfied cannot matter.
  bool live(int v) const {
    for (int c : occ_[v])
      if (!satisfied(c)) return true;
    return false;
  }

  int compile_node(int x) {
    const DtreeNode& node = dt_.nodes[x];
    if (node.is_leaf() && satisfied(node.clause)) return build_.true_node();
    std::vector<std::uint64_t> key;
    if (opts_.use_cache) {
      // The subproblem is fixed by how the context simplifies the clauses
      // below x: per clause, satisfied by a context literal, or else which
      // of its context literals are still open.
      std::size_t bit = 0;
      auto push = [&](bool b) {
        if (bit % 64 == 0) key.push_back(0);
        if (b) key.back() |= std::uint64_t{1} << (bit % 64);
        ++bit;
      };
      for (const auto& lits : boundary_[x]) {
        bool sat = false;
        for (Lit l : lits) sat = sat || truth(l) > 0;
        push(sat);
        if (!sat)
          for (Lit l : lits) push(truth(l) == 0);
      }
      auto it = cache_[x].find(key);
      if (it != cache_[x].end()) {
        ++out_.stats.cache_hits;
        return it->second;
      }
      ++out_.stats.cache_misses;
    }
    int r = node.is_leaf() ? decide_leaf(node.clause) : decide(x, 0);
    if (opts_.use_cache) cache_[x].emplace(std::move(key), r);
    return r;
  }

  // Branch on v; `next` compiles the remainder under each value.
  template <class Next>
  int branch(int v, Next&& next) {
    ++out_.stats.decisions;
    int result[2];
    for (int side = 0; side < 2; ++side) {
      const Lit l = side == 0 ? v : -v;
      const std::size_t level = trail_.size();
      int r = build_.false_node();
      if (assign(l) && propagate()) {
        int sub = next();
        if (sub != build_.false_node()) {
          std::vector<int> kids;
          for (std::size_t i = level; i < trail_.size(); ++i) kids.push_back(build_.literal(trail_[i]));
          kids.push_back(sub);
          r = build_.conjoin(std::move(kids));
        }
      }
      backtrack(level);
      result[side] = r;
    }
    return build_.decide(v, result[0], result[1]);
  }

  int decide(int x, std::size_t i) {
    const auto& sep = sep_[x];
    while (i < sep.size() && (value_[sep[i]] != 0 || !live(sep[i]))) ++i;
    if (i == sep.size()) {
      const DtreeNode& node = dt_.nodes[x];
      int left = compile_node(node.left);
      if (left == build_.false_node()) return left;
      int right = compile_node(node.right);
      return build_.conjoin({left, right});
    }
    return branch(sep[i], [&] { return decide(x, i + 1); });
  }

  int decide_leaf(int c) {
    if (satisfied(c)) return build_.true_node();
    const Lit* cl = lits_.data() + start_[c];
    for (int k = 0; k < size_[c]; ++k)
      if (truth(cl[k]) == 0) {
        const int v = std::abs(cl[k]);
        return branch(v, [&] { return decide_leaf(c); });
      }
    return build_.false_node();
  }

  const WeightedCnf& cnf_;
  const Dtree& dt_;
  const CompileOptions& opts_;
  CompileResult& out_;
  Builder build_;

  std::vector<std::int8_t> value_;
  std::vector<Lit> trail_;
  std::size_t qhead_ = 0;
  std::vector<Lit> lits_;
  std::vector<int> start_;
  std::vector<int> size_;
  std::vector<std::vector<int>> watches_;
  std::vector<std::vector<int>> occ_;
  std::vector<std::vector<int>> sep_;
  std::vector<std::vector<std::vector<Lit>>> boundary_;
  std::vector<std::unordered_map<std::vector<std::uint64_t>, int, VectorHash>> cache_;
};

// Deep dtrees recurse deeply; compile on a thread with a large stack.
template <class F>
void run_with_big_stack(F&& f) {
  struct Ctx {
    F* f;
    std::exception_ptr err;
  } ctx{&f, nullptr};
  auto trampoline = [](void* p) -> void* {
    auto* c = static_cast<Ctx*>(p);
    try {
      (*c->f)();
    } catch (...) {
      c->err = std::current_exception();
    }
    return nullptr;
  };
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, std::size_t{1} << 30);
  pthread_t th;
  if (pthread_create(&th, &attr, trampoline, &ctx) != 0) {
    pthread_attr_destroy(&attr);
    f();
    return;
  }
  pthread_join(th, nullptr);
  pthread_attr_destroy(&attr);
  if (ctx.err) std::rethrow_exception(ctx.err);
}

// Copy of `g` holding only nodes reachable from the root, order preserved.
DdnnfGraph reachable(const DdnnfGraph& g) {
  DdnnfGraph out;
  out.num_vars = g.num_vars;
  if (g.root < 0) return out;
  std::vector<char> keep(g.node_count(), 0);
  keep[g.root] = 1;
  for (int i = g.root; i >= 0; --i)
    if (keep[i])
      for (int k : g.children(i)) keep[k] = 1;
  std::vector<int> id(g.node_count(), -1);
  std::vector<int> kids;
  for (int i = 0; i <= g.root; ++i) {
    if (!keep[i]) continue;
    kids.clear();
    for (int k : g.children(i)) kids.push_back(id[k]);
    id[i] = out.add(g.node(i).kind, g.node(i).lit, kids);
  }
  out.root = id[g.root];
  return out;
}

}  // namespace

CompileResult compile(const WeightedCnf& cnf, const Dtree& dtree, const CompileOptions& opts) {
  for (int c : dtree.leaf_clauses)
    if (cnf.clauses[c].empty()) throw Error(ErrorKind::internal, "dtree leaf holds an empty clause");
  // The engine numbers clauses densely in cnf order; leaves refer to cnf
  // indices, so empty clauses must not shift them.
  bool has_empty = std::any_of(cnf.clauses.begin(), cnf.clauses.end(),
                               [](const auto& c) { return c.empty(); });
  CompileResult res;
  const auto t0 = std::chrono::steady_clock::now();
  if (has_empty) {
    Builder b(res.graph, opts.node_budget);
    res.graph.num_vars = cnf.num_vars;
    res.graph.root = b.false_node();
  } else {
    run_with_big_stack([&] {
      Engine engine(cnf, dtree, opts, res);
      res.graph.root = engine.run();
    });
  }
  res.graph = reachable(res.graph);
  res.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.stats.nodes = res.graph.node_count();
  res.stats.edges = res.graph.edge_count();
  res.stats.dtree_width = dtree.width();
  return res;
}

CompileResult compile(const WeightedCnf& cnf, const CompileOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const InteractionGraph graph = InteractionGraph::from_cnf(cnf);
  MinfillResult mf = minfill_order(graph);
  for (int t = 1; t < opts.order_trials; ++t) {
    MinfillResult other = minfill_order(graph, static_cast<std::uint64_t>(t));
    if (other.max_cluster < mf.max_cluster) mf = std::move(other);
  }
  std::vector<int> order;
  order.reserve(mf.order.size());
  for (int v : mf.order) order.push_back(v + 1);
  Dtree dt = build_dtree(cnf, order);
  CompileResult res = compile(cnf, dt, opts);
  res.stats.max_cluster = mf.max_cluster;
  res.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace bnac
