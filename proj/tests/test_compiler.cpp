#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <sstream>

#include "bnac/compiler.hpp"
#include "bnac/logic.hpp"

using namespace bnac;
using namespace bnac::testing;

namespace {

WeightedCnf random_cnf(Rng& rng, int vars, int clauses, int max_len) {
  WeightedCnf cnf;
  std::uniform_real_distribution<double> w(0.1, 1.0);
  for (int i = 0; i < vars; ++i) cnf.add_var({}, w(rng));
  std::uniform_int_distribution<int> len(1, max_len), var(1, vars);
  for (int c = 0; c < clauses; ++c) {
    std::vector<Lit> cl;
    const int k = len(rng);
    while (static_cast<int>(cl.size()) < k) {
      int v = var(rng);
      bool dup = false;
      for (Lit l : cl) dup = dup || std::abs(l) == v;
      if (!dup) cl.push_back(rng() % 2 ? v : -v);
    }
    cnf.add_clause(cl, ClauseOrigin::other);
  }
  return cnf;
}

std::string nnf_text(const DdnnfGraph& g) {
  std::ostringstream out;
  write_nnf(g, out);
  return out.str();
}

double compiled_wmc(const CompileResult& r, const WeightedCnf& cnf) {
  auto free = cnf.free_vars();
  return cnf.prefactor * ddnnf_weighted_count(r.graph, cnf.weights, free);
}

}  // namespace

TEST_CASE("minfill on small graphs") {
  InteractionGraph empty;
  MinfillResult e = minfill_order(empty);
  CHECK(e.order.empty());
  CHECK(e.max_cluster == 0.0);

  InteractionGraph tri;
  tri.adj.resize(3);
  tri.log_size.assign(3, 1.0);
  tri.add_edge(0, 1);
  tri.add_edge(1, 2);
  tri.add_edge(0, 2);
  CHECK(minfill_order(tri).max_cluster == 3.0);

  InteractionGraph chain;
  chain.adj.resize(8);
  chain.log_size.assign(8, 1.0);
  for (int i = 0; i + 1 < 8; ++i) chain.add_edge(i, i + 1);
  MinfillResult c = minfill_order(chain);
  CHECK(c.max_cluster == 2.0);
  CHECK(c.order.size() == 8);
  CHECK(c.order == minfill_order(chain).order);
}

TEST_CASE("minfill cluster of the fig1 moral graph") {
  auto net = load_fixture("fig1.net");
  MinfillResult r = minfill_order(InteractionGraph::from_network(*net));
  CHECK(r.max_cluster == doctest::Approx(1.0 + 1.0 + std::log2(3.0)));
}

TEST_CASE("dtree shapes") {
  WeightedCnf one;
  one.add_var({}, 1.0);
  one.add_var({}, 1.0);
  one.add_clause({1, 2}, ClauseOrigin::other);
  Dtree d1 = build_dtree(one, {1, 2});
  CHECK(d1.nodes.size() == 1);
  CHECK(d1.nodes[d1.root].is_leaf());

  WeightedCnf two = one;
  two.add_var({}, 1.0);
  two.add_var({}, 1.0);
  two.add_clause({3, -4}, ClauseOrigin::other);
  Dtree d2 = build_dtree(two, {1, 2, 3, 4});
  REQUIRE(!d2.nodes[d2.root].is_leaf());
  CHECK(d2.separator[d2.root].empty());
}

TEST_CASE("property: dtree leaves partition the clauses and separators lie below") {
  Rng rng(8);
  for (int iter = 0; iter < 50; ++iter) {
    WeightedCnf cnf = random_cnf(rng, 12, 20, 3);
    auto order = minfill_order(InteractionGraph::from_cnf(cnf)).order;
    for (int& v : order) ++v;
    Dtree d = build_dtree(cnf, order);
    std::vector<int> seen(cnf.clauses.size(), 0);
    for (const auto& n : d.nodes)
      if (n.is_leaf()) ++seen[n.clause];
    for (std::size_t c = 0; c < cnf.clauses.size(); ++c) CHECK(seen[c] == 1);
    for (std::size_t i = 0; i < d.nodes.size(); ++i) {
      std::set<int> below;
      for (int p = d.nodes[i].begin; p < d.nodes[i].end; ++p)
        for (Lit l : cnf.clauses[d.leaf_clauses[p]]) below.insert(std::abs(l));
      for (int v : d.separator[i]) CHECK(below.count(v) == 1);
    }
  }
}

TEST_CASE("trivial compilations") {
  WeightedCnf none;
  none.add_var({}, 0.3);
  CompileResult r = compile(none);
  CHECK(r.graph.node(r.graph.root).kind == NnfKind::true_node);
  std::vector<int> universe{1};
  CHECK(ddnnf_weighted_count(r.graph, none.weights, universe) == doctest::Approx(1.3));

  WeightedCnf bad;
  bad.add_var({}, 0.5);
  bad.add_clause({1}, ClauseOrigin::other);
  bad.add_clause({-1}, ClauseOrigin::other);
  CompileResult f = compile(bad);
  CHECK(f.graph.node(f.graph.root).kind == NnfKind::false_node);
}

TEST_CASE("fig1 with a2 b1 compiles to three models") {
  auto net = load_fixture("fig1.net");
  Evidence ev;
  ev.assignments[0] = 1;
  ev.assignments[1] = 0;
  EncodeOptions o;
  o.refinements = false;
  PropagationResult p = unit_propagate(encode(net, ev, o));
  REQUIRE(!p.conflict);
  CompileResult r = compile(p.simplified);
  CHECK(ddnnf_model_count(r.graph, p.simplified.free_vars()) == 3.0);
  CHECK(verify_ddnnf(r.graph, p.simplified).ok());
}

TEST_CASE("shared variable under an And is a decomposability violation") {
  DdnnfGraph g;
  g.num_vars = 2;
  int a = g.add(NnfKind::literal, 1, {});
  int b = g.add(NnfKind::literal, -1, {});
  int c = g.add(NnfKind::literal, 2, {});
  std::vector<int> kids{a, b, c};
  g.root = g.add(NnfKind::and_node, 0, kids);
  WeightedCnf cnf;
  cnf.add_var({}, 1.0);
  cnf.add_var({}, 1.0);
  VerifyReport r = verify_ddnnf(g, cnf);
  CHECK(r.decomposability_violations == 1);
  CHECK(!r.ok());

  DdnnfGraph t;
  t.num_vars = 2;
  t.root = t.add(NnfKind::true_node, 0, {});
  WeightedCnf sat = cnf;
  sat.add_clause({1, 2}, ClauseOrigin::other);
  VerifyReport tr = verify_ddnnf(t, sat);
  CHECK(tr.decomposability_violations == 0);
  CHECK(tr.determinism_violations == 0);
}

TEST_CASE("property: compiled random CNFs are sound d-DNNF with exact counts") {
  Rng rng(19);
  for (int iter = 0; iter < 200; ++iter) {
    const int vars = 4 + static_cast<int>(rng() % 13);
    WeightedCnf cnf = random_cnf(rng, vars, static_cast<int>(vars * 1.5), 4);
    const double expect = weighted_model_count_oracle(cnf);
    PropagationResult p = unit_propagate(cnf);
    INFO("iter " << iter);
    if (p.conflict) {
      CHECK(expect == 0.0);
      continue;
    }
    CompileResult r = compile(p.simplified);
    VerifyReport v = verify_ddnnf(r.graph, p.simplified);
    CHECK(v.ok());
    CHECK(v.counted);
    CHECK(std::abs(compiled_wmc(r, p.simplified) - expect) <= 1e-12 * std::max(1.0, expect));
    if (r.graph.node_count() > 0) CHECK(r.stats.edges + 1 >= r.stats.nodes);

    CompileOptions nocache;
    nocache.use_cache = false;
    CompileResult u = compile(p.simplified, nocache);
    CHECK(ddnnf_model_count(u.graph, p.simplified.free_vars()) ==
          ddnnf_model_count(r.graph, p.simplified.free_vars()));
    CHECK(std::abs(compiled_wmc(u, p.simplified) - expect) <= 1e-12 * std::max(1.0, expect));
  }
}

TEST_CASE("compilation is deterministic") {
  Rng rng(23);
  for (int iter = 0; iter < 20; ++iter) {
    auto net = std::make_shared<BayesianNetwork>(random_network(rng));
    WeightedCnf cnf = unit_propagate(encode(net, random_evidence(rng, *net))).simplified;
    CompileResult a = compile(cnf);
    CompileResult b = compile(cnf);
    CHECK(a.stats.edges == b.stats.edges);
    CHECK(a.stats.cache_hits == b.stats.cache_hits);
    CHECK(nnf_text(a.graph) == nnf_text(b.graph));
  }
}

TEST_CASE("edge budget fails cleanly") {
  WeightedCnf cnf;
  for (int i = 0; i < 30; ++i) cnf.add_var({}, 0.5);
  for (int i = 1; i < 30; ++i) cnf.add_clause({i, i + 1}, ClauseOrigin::other);
  CompileOptions o;
  o.node_budget = 10;
  try {
    compile(cnf, o);
    FAIL("expected budget failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::budget_exceeded);
  }
}

TEST_CASE("nnf text round-trips") {
  Rng rng(31);
  WeightedCnf cnf = random_cnf(rng, 10, 14, 3);
  CompileResult r = compile(cnf);
  std::stringstream ss;
  write_nnf(r.graph, ss);
  DdnnfGraph back = read_nnf(ss);
  CHECK(nnf_text(back) == nnf_text(r.graph));
  CHECK(ddnnf_model_count(back, cnf.free_vars()) == ddnnf_model_count(r.graph, cnf.free_vars()));
}

TEST_CASE("order trials never pick a larger cluster") {
  Rng rng(37);
  for (int iter = 0; iter < 10; ++iter) {
    WeightedCnf cnf = random_cnf(rng, 20, 30, 3);
    CompileOptions o;
    o.order_trials = 5;
    CompileResult one = compile(cnf);
    CompileResult many = compile(cnf, o);
    CHECK(many.stats.max_cluster <= one.stats.max_cluster);
    CHECK(ddnnf_model_count(many.graph, cnf.free_vars()) == ddnnf_model_count(one.graph, cnf.free_vars()));
  }
}
