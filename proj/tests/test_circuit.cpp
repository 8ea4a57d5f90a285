#include "doctest.h"
#include "support.hpp"

#include <chrono>
#include <cmath>

#include "bnac/noisyor.hpp"
#include "bnac/pipeline.hpp"

using namespace bnac;
using namespace bnac::testing;

namespace {

std::shared_ptr<BayesianNetwork> all_learnable(BayesianNetwork net) {
  for (VarId v = 0; v < net.size(); ++v) net.set_learnable(v);
  return std::make_shared<BayesianNetwork>(std::move(net));
}

ParamTables tables_of(const BayesianNetwork& net) {
  ParamTables p(net.size());
  for (VarId v : net.learnable()) p[v] = net.cpt(v).table;
  return p;
}

}  // namespace

TEST_CASE("a lone root evaluates to one") {
  auto net = std::make_shared<BayesianNetwork>();
  VarId x = net->add_variable("X", {"a", "b"});
  net->set_cpt(x, {}, {0.4, 0.6});
  CompiledModel m = compile_network(net, {});
  CHECK(evaluate(m.circuit, {}) == doctest::Approx(1.0).epsilon(1e-15));
  auto marg = variable_marginals(m.circuit, Evidence{});
  CHECK(marg[x][0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("fig1 circuit under a2 b1") {
  auto net = load_fixture("fig1.net");
  Evidence ev;
  ev.assignments[0] = 1;
  ev.assignments[1] = 0;
  CompiledModel m = compile_network(net, ev);
  CHECK(evaluate(m.circuit, {}) == doctest::Approx(0.7 * 0.6).epsilon(1e-15));
  auto marg = variable_marginals(m.circuit, Evidence{});
  CHECK(marg[2][0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(marg[2][1] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(marg[2][2] == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("c1 makes the A marginal a point mass") {
  auto net = load_fixture("phenotype.net");
  Evidence ev;
  ev.assignments[2] = 0;
  CompiledModel m = compile_network(net, ev);
  auto marg = variable_marginals(m.circuit, Evidence{});
  CHECK(marg[0][0] == 1.0);
  CHECK(marg[0][1] == 0.0);
}

TEST_CASE("property: online evidence matches enumeration") {
  Rng rng(51);
  for (int iter = 0; iter < 150; ++iter) {
    auto net = std::make_shared<BayesianNetwork>(random_network(rng));
    Evidence baked = random_evidence(rng, *net, 0.2, 1);
    CompiledModel m = compile_network(net, baked);
    Evidence extra = random_evidence(rng, *net, 0.3, 0);
    Evidence both = baked;
    bool clash = false;
    for (auto [v, s] : extra.assignments) {
      auto it = both.assignments.find(v);
      if (it != both.assignments.end() && it->second != s) clash = true;
      both.assignments[v] = s;
    }
    INFO("iter " << iter);
    const double got = evaluate(m.circuit, extra);
    if (clash) {
      CHECK(got == 0.0);
      continue;
    }
    CHECK(std::abs(got - brute_force_pr(*net, both)) <= 1e-12);
  }
}

TEST_CASE("full online instantiation gives a single term") {
  auto net = load_fixture("fig1.net");
  CompiledModel m = compile_network(net, {});
  Evidence all;
  all.assignments = {{0, 1}, {1, 0}, {2, 2}};
  CHECK(evaluate(m.circuit, all) == doctest::Approx(0.7 * 0.6 * 0.1).epsilon(1e-15));
}

TEST_CASE("property: family marginals and partials match enumeration") {
  Rng rng(53);
  int checked = 0;
  for (int iter = 0; iter < 120; ++iter) {
    RandomNetSpec spec;
    spec.max_vars = 7;
    auto net = all_learnable(random_network(rng, spec));
    Evidence ev = sampled_evidence(rng, *net, 0.3);
    CompiledModel m = compile_network(net, ev);
    EvalResult r = differentiate(m.circuit, Evidence{});
    INFO("iter " << iter);
    REQUIRE(r.value > 0.0);
    for (VarId v = 0; v < net->size(); ++v) {
      auto fam = family_marginals(m.circuit, r, v);
      auto expect = brute_force_family_marginals(*net, ev, v);
      REQUIRE(fam.size() == expect.size());
      double sum = 0.0;
      for (std::size_t i = 0; i < fam.size(); ++i) {
        CHECK(std::abs(fam[i] - expect[i]) <= 1e-9);
        sum += fam[i];
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
    auto marg = variable_marginals(m.circuit, r);
    for (VarId v = 0; v < net->size(); ++v) {
      const int x = m.circuit.indicator_slot(v, 0);
      if (x < 0 || ev.assignments.count(v)) continue;
      Evidence e0 = ev;
      e0.assignments.erase(v);
      CHECK(std::abs(r.partials[x] - brute_force_pr(*net, [&] {
              Evidence e = e0;
              e.assignments[v] = 0;
              return e;
            }())) <= 1e-12);
      double s = 0.0;
      for (double p : marg[v]) s += p;
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }
    ++checked;
  }
  CHECK(checked == 120);
}

TEST_CASE("property: new parameters need no recompilation") {
  Rng rng(57);
  auto net = all_learnable(*load_fixture("fig1.net"));
  Evidence ev;
  ev.constraints.push_back({{2, 0}, {2, 1}});
  CompiledModel m = compile_network(net, ev);
  for (int k = 0; k < 100; ++k) {
    BayesianNetwork copy = *net;
    randomize_cpts(rng, copy, copy.learnable());
    CHECK(std::abs(evaluate(m.circuit, {}, tables_of(copy)) - brute_force_pr(copy, ev)) <= 1e-12);
  }
}

TEST_CASE("zero-probability evidence and pruned variables") {
  auto net = load_fixture("phenotype.net");
  Evidence ev;
  ev.assignments[2] = 1;
  CompiledModel m = compile_network(net, ev);
  Evidence extra;
  extra.assignments = {{0, 0}, {1, 0}};
  EvalResult r = differentiate(m.circuit, extra);
  CHECK(r.value == 0.0);
  CHECK(r.partials[m.circuit.indicator_slot(0, 0)] == 0.0);
  CHECK(r.partials[m.circuit.indicator_slot(0, 1)] == doctest::Approx(0.25).epsilon(1e-15));
  try {
    variable_marginals(m.circuit, r);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::inconsistent_evidence);
  }

  PipelineOptions o;
  o.query_vars = std::set<VarId>{0};
  auto fig = load_fixture("fig1.net");
  CompiledModel small = compile_network(fig, {}, o);
  Evidence on_pruned;
  on_pruned.assignments[2] = 0;
  try {
    evaluate(small.circuit, on_pruned);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unsupported_query);
    CHECK(std::string(e.what()).find("C") != std::string::npos);
  }
  try {
    family_marginals(m.circuit, Evidence{}, {}, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unsupported_query);
  }
}

TEST_CASE("batch evaluation: parallel equals serial") {
  GeneratedProblem g = generate(20, 40, 4, 3, 7);
  DecomposedIds ids;
  auto net = std::make_shared<const BayesianNetwork>(decompose(g.network, &ids));
  PipelineOptions po;
  po.query_vars = std::set<VarId>(ids.disease.begin(), ids.disease.end());
  CompiledModel m = compile_network(net, findings_evidence(ids, g.findings), po);
  Rng rng(3);
  std::vector<std::vector<double>> sets;
  for (int b = 0; b < 64; ++b) {
    Evidence ev;
    for (VarId d : ids.disease)
      if (rng() % 3 == 0) ev.assignments[d] = static_cast<StateId>(rng() % 2);
    sets.push_back(slot_values(m.circuit, ev));
  }
  auto a = evaluate_batch(m.circuit, sets, Exec::serial);
  auto b = evaluate_batch(m.circuit, sets, Exec::parallel);
  CHECK(a == b);
  std::vector<double> scratch;
  for (std::size_t i = 0; i < sets.size(); ++i)
    CHECK(a[i] == evaluate<double>(m.circuit, std::span<const double>(sets[i]), scratch));
}

TEST_CASE("downward pass costs at most five upward passes") {
  GeneratedProblem g = generate(40, 100, 5, 4, 13);
  DecomposedIds ids;
  auto net = std::make_shared<const BayesianNetwork>(decompose(g.network, &ids));
  PipelineOptions po;
  po.query_vars = std::set<VarId>(ids.disease.begin(), ids.disease.end());
  CompiledModel m = compile_network(net, findings_evidence(ids, g.findings), po);
  std::vector<double> slots = slot_values(m.circuit, {});
  std::vector<double> values, partials, slot_partials, scratch;
  using Clock = std::chrono::steady_clock;
  auto best = [](auto&& f) {
    double t = 1e300;
    for (int k = 0; k < 7; ++k) {
      auto s = Clock::now();
      for (int r = 0; r < 20; ++r) f();
      t = std::min(t, std::chrono::duration<double>(Clock::now() - s).count());
    }
    return t;
  };
  const std::span<const double> in(slots);
  const double up = best([&] { evaluate<double>(m.circuit, in, scratch); });
  const double both = best([&] { differentiate<double>(m.circuit, in, values, partials, slot_partials); });
  MESSAGE("edges " << m.circuit.edge_count() << " up " << up << " up+down " << both);
  CHECK((both - up) <= 5.0 * up);
}
