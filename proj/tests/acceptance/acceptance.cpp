#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "support.hpp"

#include "bnac/encoder.hpp"
#include "bnac/io.hpp"
#include "bnac/learning.hpp"
#include "bnac/logic.hpp"
#include "bnac/noisyor.hpp"
#include "bnac/pipeline.hpp"
#include "bnac/report.hpp"

using namespace bnac;
using namespace bnac::testing;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Instance {
  std::shared_ptr<const BayesianNetwork> net;
  Evidence ev;
};

const std::vector<Instance>& corpus() {
  static const std::vector<Instance> c = [] {
    std::vector<Instance> out;
    Rng rng(2024);
    for (int i = 0; i < 500; ++i) {
      auto net = std::make_shared<const BayesianNetwork>(random_network(rng));
      Evidence ev = random_evidence(rng, *net, 0.3, 2);
      out.push_back({net, ev});
    }
    return out;
  }();
  return c;
}

Outcome c1_oracle() {
  const auto start = Clock::now();
  double worst = 0.0;
  int zero = 0, constrained = 0;
  for (const auto& in : corpus()) {
    const double expect = brute_force_pr(*in.net, in.ev);
    CompiledModel m = compile_network(in.net, in.ev);
    const double got = evaluate(m.circuit, Evidence{});
    worst = std::max(worst, std::abs(got - expect));
    if (!in.ev.constraints.empty()) ++constrained;
    if (expect == 0.0) {
      ++zero;
      continue;
    }
    auto a = brute_force_marginals(*in.net, in.ev);
    auto b = variable_marginals(m.circuit, Evidence{});
    for (VarId v = 0; v < in.net->size(); ++v)
      for (StateId s = 0; s < in.net->card(v); ++s) worst = std::max(worst, std::abs(a[v][s] - b[v][s]));
  }
  const double secs = since(start);
  return {worst <= 1e-9 && secs <= 60.0,
          fmt("%zu networks (%d with constraints, %d with Pr(e)=0), max error %.2e, %.1fs", corpus().size(),
              constrained, zero, worst, secs)};
}

double model_count(WeightedCnf cnf) {
  std::fill(cnf.weights.begin() + 1, cnf.weights.end(), 1.0);
  cnf.prefactor = 1.0;
  return weighted_model_count_oracle(cnf, 400);
}

Outcome c2_mlf() {
  auto net = load_fixture("fig1.net");
  Evidence ev;
  ev.assignments[*net->find("A")] = 1;
  ev.assignments[*net->find("B")] = 0;
  const std::size_t t0 = enumerate_terms(*net, {}).size(), t1 = enumerate_terms(*net, ev).size();
  EncodeOptions plain;
  plain.refinements = false;
  const double m0 = model_count(encode(net, {}, plain)), m1 = model_count(encode(net, ev, plain));
  PropagationResult p = unit_propagate(encode(net, ev, plain));
  const double c1 = p.conflict ? 0.0 : ddnnf_model_count(compile(p.simplified).graph, p.simplified.free_vars());
  return {t0 == 12 && t1 == 3 && m0 == 12.0 && m1 == 3.0 && c1 == 3.0,
          fmt("terms %zu/%zu, encoder models %.0f/%.0f, compiled models with evidence %.0f", t0, t1, m0, m1, c1)};
}

Outcome c3_determinism() {
  auto net = load_fixture("phenotype.net");
  const VarId a = *net->find("A"), b = *net->find("B"), c = *net->find("C");
  Evidence e1;
  e1.assignments[c] = 0;
  PropagationResult r1 = unit_propagate(encode(net, e1));
  Evidence l1 = r1.conflict ? Evidence{} : learned_evidence(r1, e1);
  const bool pa = l1.assignments == std::map<VarId, StateId>{{a, 0}, {b, 0}};

  Evidence e2;
  e2.assignments[c] = 1;
  PropagationResult r2 = unit_propagate(encode(net, e2));
  const double models = r2.conflict ? 0.0 : model_count(r2.simplified);
  Evidence l2 = r2.conflict ? Evidence{} : learned_evidence(r2, e2);
  const bool pb = models == 2.0 && l2.assignments.empty();

  auto inh = load_fixture("inheritance.net");
  Evidence e3;
  e3.assignments[*inh->find("C")] = 0;
  CompiledModel m = compile_network(inh, e3);
  Evidence s1;
  s1.assignments[*inh->find("S")] = 0;
  auto marg = variable_marginals(m.circuit, s1);
  const auto& am = marg[*inh->find("A")];
  const bool pc = am[0] == 1.0 && am[1] == 0.0;
  return {pa && pb && pc, fmt("(a) learned a1 b1: %s; (b) models %.0f, learned assignments %zu; (c) Pr(A | c1, s1) = "
                              "[%.17g, %.17g]",
                              pa ? "yes" : "no", models, l2.assignments.size(), am[0], am[1])};
}

Outcome c4_ddnnf() {
  std::size_t decomp = 0, det = 0, count_mismatch = 0, counted = 0;
  double worst = 0.0;
  for (const auto& in : corpus()) {
    CompiledModel m = compile_network(in.net, in.ev);
    VerifyReport r = verify_ddnnf(m.graph, m.cnf);
    decomp += r.decomposability_violations;
    det += r.determinism_violations;
    if (r.counted) {
      ++counted;
      if (r.graph_count != r.cnf_count) ++count_mismatch;
    }
    EvalResult e = differentiate(m.circuit, Evidence{});
    if (e.value <= 0.0) continue;
    for (const auto& mv : variable_marginals(m.circuit, e)) {
      if (mv.empty()) continue;
      double s = 0.0;
      for (double x : mv) s += x;
      worst = std::max(worst, std::abs(s - 1.0));
    }
  }
  return {decomp == 0 && det == 0 && count_mismatch == 0 && worst <= 1e-9,
          fmt("decomposability violations %zu, determinism violations %zu, count mismatches %zu of %zu counted, "
              "max |sum - 1| %.2e",
              decomp, det, count_mismatch, counted, worst)};
}

Outcome c5_partials() {
  Rng rng(505);
  const double h = 1e-6;
  double worst = 0.0;
  int triples = 0;
  while (triples < 100) {
    RandomNetSpec spec;
    spec.max_vars = 8;
    BayesianNetwork base = random_network(rng, spec);
    for (VarId v = 0; v < base.size(); ++v) base.set_learnable(v);
    auto net = std::make_shared<const BayesianNetwork>(base);
    Evidence ev = sampled_evidence(rng, *net, 0.3);
    CompiledModel m = compile_network(net, ev);
    BayesianNetwork point = *net;
    randomize_cpts(rng, point, point.learnable());
    ParamTables params(net->size());
    for (VarId v : net->learnable()) params[v] = point.cpt(v).table;
    EvalResult r = differentiate(m.circuit, Evidence{}, params);
    std::vector<std::pair<VarId, std::size_t>> entries;
    for (VarId v : net->learnable())
      for (std::size_t i = 0; i < params[v].size(); ++i) {
        const int card = net->card(v);
        if (m.circuit.parameter_slot(v, static_cast<int>(i / card), static_cast<StateId>(i % card)) >= 0)
          entries.emplace_back(v, i);
      }
    if (entries.empty()) continue;
    auto [v, i] = entries[rng() % entries.size()];
    const int card = net->card(v);
    const int slot = m.circuit.parameter_slot(v, static_cast<int>(i / card), static_cast<StateId>(i % card));
    auto value_at = [&](double delta) {
      ParamTables p = params;
      p[v][i] += delta;
      std::vector<double> sv = slot_values(m.circuit, Evidence{}, p);
      std::vector<long double> lv(sv.begin(), sv.end()), scratch;
      return evaluate<long double>(m.circuit, std::span<const long double>(lv), scratch);
    };
    const long double hp = static_cast<long double>(params[v][i] + h) - params[v][i];
    const long double hm = static_cast<long double>(params[v][i]) - (params[v][i] - h);
    const double fd = static_cast<double>((value_at(h) - value_at(-h)) / (hp + hm));
    worst = std::max(worst, rel_err(fd, r.partials[slot]));
    ++triples;
  }
  return {worst <= 1e-6, fmt("%d triples, max relative error %.2e", triples, worst)};
}

struct EmProblem {
  std::shared_ptr<BayesianNetwork> net;
  std::vector<NamedCase> cases;
};

EmProblem em_problem(Rng& rng, int ncases, double observed) {
  RandomNetSpec spec;
  spec.max_vars = 7;
  spec.max_states = 3;
  EmProblem g;
  g.net = std::make_shared<BayesianNetwork>(random_network(rng, spec));
  std::set<VarId> learn;
  for (VarId v = 0; v < g.net->size(); ++v)
    if (rng() % 2 == 0) learn.insert(v);
  if (learn.empty()) learn.insert(0);
  randomize_cpts(rng, *g.net, learn);
  for (VarId v : learn) g.net->set_learnable(v);
  for (int k = 0; k < ncases; ++k) g.cases.push_back({"c" + std::to_string(k), sampled_evidence(rng, *g.net, observed)});
  return g;
}

ParamTables with_counts(const BayesianNetwork& net, const ParamTables& init,
                        const std::function<void(VarId, std::vector<double>&)>& fill) {
  ParamTables out = init;
  for (VarId v : net.learnable()) {
    std::vector<double> counts(net.cpt(v).table.size(), 0.0);
    fill(v, counts);
    const int card = net.card(v);
    for (std::size_t r = 0; r < net.row_count(v); ++r) {
      double total = 0.0;
      for (int s = 0; s < card; ++s) total += counts[r * card + s];
      if (total > 0.0)
        for (int s = 0; s < card; ++s) out[v][r * card + s] = counts[r * card + s] / total;
    }
  }
  return out;
}

ParamTables reference_step(const BayesianNetwork& net, const std::vector<NamedCase>& cases, const ParamTables& params) {
  BayesianNetwork cur = net;
  for (VarId v : net.learnable()) cur.mutable_cpt(v).table = params[v];
  return with_counts(net, params, [&](VarId v, std::vector<double>& counts) {
    for (const auto& c : cases) {
      auto fam = brute_force_family_marginals(cur, c.evidence, v);
      for (std::size_t i = 0; i < fam.size(); ++i) counts[i] += fam[i];
    }
  });
}

double max_diff(const BayesianNetwork& net, const ParamTables& a, const ParamTables& b) {
  double d = 0.0;
  for (VarId v : net.learnable())
    for (std::size_t i = 0; i < a[v].size(); ++i) d = std::max(d, std::abs(a[v][i] - b[v][i]));
  return d;
}

BayesianNetwork layered_network(Rng& rng) {
  BayesianNetwork net;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const int layers = 4, width = 5;
  for (int l = 0; l < layers; ++l)
    for (int i = 0; i < width; ++i) net.add_variable("L" + std::to_string(l) + "_" + std::to_string(i), {"a", "b", "c"});
  for (VarId v = 0; v < net.size(); ++v) {
    std::vector<VarId> parents;
    if (v >= width) {
      const int l = v / width;
      parents = {(l - 1) * width + (v % width), (l - 1) * width + ((v + 1) % width)};
    }
    std::size_t rows = 1;
    for (VarId p : parents) rows *= net.card(p);
    std::vector<double> table;
    for (std::size_t r = 0; r < rows; ++r) {
      double x[3] = {u(rng), u(rng), u(rng)};
      const double s = x[0] + x[1] + x[2];
      for (double y : x) table.push_back(y / s);
    }
    net.set_cpt(v, parents, table);
    net.set_learnable(v);
  }
  return net;
}

Outcome c6_em() {
  Rng rng(606);
  double drop = 0.0;
  for (int k = 0; k < 50; ++k) {
    EmProblem g = em_problem(rng, 6, 0.5);
    LearningProblem p = make_learning_problem(g.net, g.cases);
    p.options.max_iters = 40;
    EmTrace t = run_em(p, initial_params(*g.net, k + 1));
    for (std::size_t i = 1; i < t.log_likelihood.size(); ++i)
      drop = std::max(drop, t.log_likelihood[i - 1] - t.log_likelihood[i]);
  }

  double closed = 0.0;
  for (int k = 0; k < 10; ++k) {
    EmProblem g = em_problem(rng, 20, 1.0);
    LearningProblem p = make_learning_problem(g.net, g.cases);
    ParamTables init = initial_params(*g.net, k + 7);
    ParamTables expect = with_counts(*g.net, init, [&](VarId v, std::vector<double>& counts) {
      const auto& cpt = g.net->cpt(v);
      for (const auto& c : g.cases) {
        std::size_t row = 0;
        for (VarId par : cpt.parents) row = row * g.net->card(par) + c.evidence.assignments.at(par);
        counts[row * g.net->card(v) + c.evidence.assignments.at(v)] += 1.0;
      }
    });
    closed = std::max(closed, max_diff(*g.net, em_step(p, init).params, expect));
  }

  double limit = 0.0;
  for (int k = 0; k < 5; ++k) {
    EmProblem g = em_problem(rng, 3, 0.5);
    LearningProblem p = make_learning_problem(g.net, g.cases);
    p.options.max_iters = 5000;
    p.options.tol = 1e-13;
    ParamTables init = initial_params(*g.net, k + 11);
    EmTrace t = run_em(p, init);
    ParamTables ref = init;
    for (int it = 0; it < 5000; ++it) {
      ParamTables next = reference_step(*g.net, g.cases, ref);
      const double d = max_diff(*g.net, next, ref);
      ref = std::move(next);
      if (d < 1e-13) break;
    }
    limit = std::max(limit, max_diff(*g.net, t.params, ref));
  }

  auto big = std::make_shared<BayesianNetwork>(layered_network(rng));
  std::vector<NamedCase> cases;
  for (int k = 0; k < 800; ++k) cases.push_back({"c" + std::to_string(k), sampled_evidence(rng, *big, 0.5)});
  LearningProblem p = make_learning_problem(big, cases);
  p.options.max_iters = 10;
  p.options.tol = 0.0;
  EmTrace t = run_em(p, initial_params(*big, 3));
  double ratio = 0.0;
  for (std::size_t i = 1; i < t.iteration_seconds.size(); ++i)
    ratio = std::max(ratio, t.iteration_seconds[i] / t.iteration_seconds[0]);

  return {drop <= 1e-9 && closed <= 1e-12 && limit <= 1e-6 && ratio <= 2.0,
          fmt("max log-likelihood drop %.2e over 50 problems, closed-form error %.2e, limit-point error %.2e, "
              "max iteration time over first %.2f (first %.4fs, %zu iterations)",
              drop, closed, limit, ratio, t.iteration_seconds.empty() ? 0.0 : t.iteration_seconds[0],
              t.iteration_seconds.size())};
}

std::vector<double> brute_posteriors(const NoisyOrNetwork& nor, const Findings& fd) {
  const int n = nor.diseases();
  std::vector<long double> post(n, 0.0L);
  long double z = 0.0L;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    long double p = 1.0L;
    for (int i = 0; i < n; ++i) p *= (mask >> i) & 1 ? nor.prior[i] : 1.0L - nor.prior[i];
    auto off = [&](int j) {
      long double o = nor.leak.empty() ? 1.0L : 1.0L - nor.leak[j];
      for (const auto& l : nor.links)
        if (l.feature == j && ((mask >> l.disease) & 1)) o *= 1.0L - l.p;
      return o;
    };
    for (int j : fd.positive) p *= 1.0L - off(j);
    for (int j : fd.negative) p *= off(j);
    z += p;
    for (int i = 0; i < n; ++i)
      if ((mask >> i) & 1) post[i] += p;
  }
  std::vector<double> out;
  for (long double x : post) out.push_back(static_cast<double>(x / z));
  return out;
}

std::vector<double> compiled_posteriors(const NoisyOrNetwork& nor, const Findings& f) {
  DecomposedIds ids;
  auto net = std::make_shared<const BayesianNetwork>(decompose(nor, &ids));
  PipelineOptions po;
  po.query_vars = std::set<VarId>(ids.disease.begin(), ids.disease.end());
  CompiledModel m = compile_network(net, findings_evidence(ids, f), po);
  auto marg = variable_marginals(m.circuit, Evidence{});
  std::vector<double> out;
  for (VarId d : ids.disease) out.push_back(marg[d][1]);
  return out;
}

double worst_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
  return w;
}

Outcome c7_noisy_or() {
  Rng rng(707);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  double joint = 0.0;
  for (int k = 0; k < 30; ++k) {
    const int n = 1 + static_cast<int>(rng() % 5), m = 1 + static_cast<int>(rng() % 5);
    NoisyOrNetwork nor;
    for (int i = 0; i < n; ++i) nor.prior.push_back(u(rng));
    nor.features = m;
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n; ++i)
        if (rng() % 2 == 0) nor.links.push_back({i, j, u(rng)});
    if (k % 2)
      for (int j = 0; j < m; ++j) nor.leak.push_back(0.2 * u(rng));
    DecomposedIds ids;
    auto net = std::make_shared<const BayesianNetwork>(decompose(nor, &ids));
    CompiledModel cm = compile_network(net, {});
    for (std::uint32_t mask = 0; mask < (1u << (n + m)); ++mask) {
      Evidence ev;
      double expect = 1.0;
      for (int i = 0; i < n; ++i) {
        const int d = (mask >> i) & 1;
        ev.assignments[ids.disease[i]] = d;
        expect *= d ? nor.prior[i] : 1.0 - nor.prior[i];
      }
      for (int j = 0; j < m; ++j) {
        const int f = (mask >> (n + j)) & 1;
        ev.assignments[ids.feature[j]] = f;
        double off = nor.leak.empty() ? 1.0 : 1.0 - nor.leak[j];
        for (const auto& l : nor.links)
          if (l.feature == j && ((mask >> l.disease) & 1)) off *= 1.0 - l.p;
        expect *= f ? 1.0 - off : off;
      }
      joint = std::max(joint, std::abs(evaluate(cm.circuit, ev) - expect));
    }
  }

  double small = 0.0;
  for (int mp = 0; mp <= 6; ++mp)
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      GeneratedProblem g = generate(12, 20, 4, mp, seed);
      auto oracle = brute_posteriors(g.network, g.findings);
      small = std::max(small, worst_gap(oracle, quickscore(g.network, g.findings).posterior));
      small = std::max(small, worst_gap(oracle, compiled_posteriors(g.network, g.findings)));
    }

  double desk = 0.0;
  for (int mp = 0; mp <= 6; ++mp)
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      GeneratedProblem g = generate(30, 50, 4, mp, seed);
      desk = std::max(desk, worst_gap(quickscore(g.network, g.findings).posterior,
                                      compiled_posteriors(g.network, g.findings)));
    }
  return {joint <= 1e-10 && small <= 1e-8 && desk <= 1e-8,
          fmt("joint error %.2e; n=12 oracle vs quickscore and compiled %.2e; desk corpus n=30 quickscore vs "
              "compiled %.2e (70 problems)",
              joint, small, desk)};
}

Outcome c8_sweep() {
  SweepOptions o;
  SweepSummary s = noisy_or_sweep(o);
  std::ostringstream rows;
  write_reports(s.rows, ReportFormat::text, rows);
  std::fputs(rows.str().c_str(), stdout);
  const bool growth = s.quickscore_growth >= 1.5 && s.quickscore_growth <= 2.5;
  const bool online = s.online_ratio < 3.0;
  const bool values = s.max_posterior_diff <= 1e-8;
  const bool time = s.seconds <= 600.0;
  return {growth && online && values && time,
          fmt("quickscore growth %.2fx per m+ (%s), online time ratio %.1fx (%s), posterior gap %.2e (%s), %.0fs (%s)",
              s.quickscore_growth, growth ? "ok" : "out of band", s.online_ratio, online ? "ok" : "not < 3x",
              s.max_posterior_diff, values ? "ok" : "too large", s.seconds, time ? "ok" : "too slow")};
}

Outcome c9_goldens() {
  std::ifstream in(data_path("family/goldens.txt"));
  std::string line;
  int members = 0, bad = 0;
  std::string worst;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name;
    std::size_t golden_with = 0, golden_without = 0;
    ls >> name >> golden_with >> golden_without;
    auto net = load_fixture("family/" + name + ".net");
    Evidence ev = parse_evidence(read_file(data_path("family/" + name + ".ev")), *net);
    const std::size_t with = compile_network(net, ev).circuit.edge_count();
    const std::size_t without = compile_network(net, {}).circuit.edge_count();
    ++members;
    if (with != golden_with || without != golden_without || with > without) {
      ++bad;
      worst += fmt(" %s %zu/%zu", name.c_str(), with, without);
    }
  }
  return {members > 0 && bad == 0, fmt("%d members, %d mismatches%s", members, bad, worst.c_str())};
}

bool same_bits(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t v = 0; v < a.size(); ++v) {
    if (a[v].size() != b[v].size()) return false;
    for (std::size_t s = 0; s < a[v].size(); ++s)
      if (std::bit_cast<std::uint64_t>(a[v][s]) != std::bit_cast<std::uint64_t>(b[v][s])) return false;
  }
  return true;
}

Outcome c10_repeatable() {
  int runs = 0, differ = 0;
  auto check = [&](std::shared_ptr<const BayesianNetwork> net, const Evidence& ev, const PipelineOptions& po) {
    CompiledModel a = compile_network(net, ev, po), b = compile_network(net, ev, po);
    EvalResult ra = differentiate(a.circuit, Evidence{}), rb = differentiate(b.circuit, Evidence{});
    bool same = a.circuit.edge_count() == b.circuit.edge_count() && a.graph.edge_count() == b.graph.edge_count() &&
                std::bit_cast<std::uint64_t>(ra.value) == std::bit_cast<std::uint64_t>(rb.value) &&
                same_bits({ra.partials}, {rb.partials});
    if (same && ra.value > 0.0) same = same_bits(variable_marginals(a.circuit, ra), variable_marginals(b.circuit, rb));
    ++runs;
    if (!same) ++differ;
  };
  for (std::size_t i = 0; i < 100; ++i) check(corpus()[i].net, corpus()[i].ev, {});
  for (int mp : {0, 4, 8}) {
    GeneratedProblem g = generate(40, 120, 5, mp, 11);
    DecomposedIds ids;
    auto net = std::make_shared<const BayesianNetwork>(decompose(g.network, &ids));
    PipelineOptions po;
    po.query_vars = std::set<VarId>(ids.disease.begin(), ids.disease.end());
    check(net, findings_evidence(ids, g.findings), po);
  }
  return {differ == 0, fmt("%d inputs compiled twice, %d differ", runs, differ)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only, expect_fail;
  app.add_option("--only", only, "criteria to run");
  app.add_option("--expect-fail", expect_fail, "criteria known to fail; exit status is 0 when exactly these fail");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", c1_oracle},
      {"multi-linear function terms", c2_mlf},
      {"determinism suite", c3_determinism},
      {"d-DNNF properties", c4_ddnnf},
      {"derivatives", c5_partials},
      {"EM", c6_em},
      {"noisy-or", c7_noisy_or},
      {"noisy-or sweep", c8_sweep},
      {"evidence shrinks compilation", c9_goldens},
      {"repeatable compilation", c10_repeatable},
  };
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    const auto start = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) failed.insert(id);
    std::printf("C%d %s %s: %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), o.detail.c_str(),
                since(start));
    std::fflush(stdout);
  }
  std::set<int> expected;
  for (int id : expect_fail)
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) expected.insert(id);
  if (failed != expected) {
    std::printf("unexpected outcome: %zu failed, %zu expected to fail\n", failed.size(), expected.size());
    return 1;
  }
  return 0;
}
