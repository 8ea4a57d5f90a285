#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include "bnac/learning.hpp"
#include "bnac/noisyor.hpp"
#include "bnac/pipeline.hpp"

using namespace bnac;

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t).count());
  }
  return best;
}

void bench_batch(int batch) {
  GeneratedProblem g = generate(40, 120, 5, 3, 11);
  DecomposedIds ids;
  auto net = std::make_shared<const BayesianNetwork>(decompose(g.network, &ids));
  PipelineOptions po;
  po.query_vars = std::set<VarId>(ids.disease.begin(), ids.disease.end());
  CompiledModel m = compile_network(net, findings_evidence(ids, g.findings), po);

  std::mt19937_64 rng(5);
  std::vector<std::vector<double>> sets;
  for (int b = 0; b < batch; ++b) {
    Evidence ev;
    for (VarId d : ids.disease)
      if (rng() % 4 == 0) ev.assignments[d] = static_cast<StateId>(rng() % 2);
    sets.push_back(slot_values(m.circuit, ev));
  }
  std::vector<double> a, b;
  const double ts = best_of(3, [&] { a = evaluate_batch(m.circuit, sets, Exec::serial); });
  const double tp = best_of(3, [&] { b = evaluate_batch(m.circuit, sets, Exec::parallel); });
  std::printf("evaluate_batch  edges %zu batch %d  serial %.4fs  parallel %.4fs  speedup %.2f  identical %s\n",
              m.circuit.edge_count(), batch, ts, tp, ts / tp, a == b ? "yes" : "no");
}

BayesianNetwork em_network(std::mt19937_64& rng) {
  BayesianNetwork net;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const int layers = 4, width = 5;
  for (int l = 0; l < layers; ++l)
    for (int i = 0; i < width; ++i)
      net.add_variable("L" + std::to_string(l) + "_" + std::to_string(i), {"a", "b", "c"});
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

void bench_em(int cases) {
  std::mt19937_64 rng(3);
  auto net = std::make_shared<const BayesianNetwork>(em_network(rng));
  std::vector<NamedCase> data;
  for (int k = 0; k < cases; ++k) {
    std::vector<StateId> inst(net->size());
    for (VarId v : net->topological_order()) {
      const std::size_t row = net->row_of(v, inst);
      std::discrete_distribution<int> d({net->theta(v, row, 0), net->theta(v, row, 1), net->theta(v, row, 2)});
      inst[v] = d(rng);
    }
    Evidence ev;
    for (VarId v = 0; v < net->size(); ++v)
      if (rng() % 2 == 0) ev.assignments[v] = inst[v];
    data.push_back({"c" + std::to_string(k), ev});
  }
  LearningProblem p = make_learning_problem(net, std::move(data));
  ParamTables init = initial_params(*net, 9);
  EmStepResult a, b;
  const double ts = best_of(3, [&] { a = em_step(p, init, Exec::serial); });
  const double tp = best_of(3, [&] { b = em_step(p, init, Exec::parallel); });
  std::printf("em_step         cases %d  offline %.3fs  serial %.4fs  parallel %.4fs  speedup %.2f  identical %s\n",
              cases, p.offline_seconds, ts, tp, ts / tp,
              a.params == b.params && a.log_likelihood == b.log_likelihood ? "yes" : "no");
}

}  // namespace

int main(int argc, char** argv) {
  const int batch = argc > 1 ? std::stoi(argv[1]) : 2000;
  const int cases = argc > 2 ? std::stoi(argv[2]) : 400;
  std::printf("threads %d\n", omp_get_max_threads());
  bench_batch(batch);
  bench_em(cases);
}
