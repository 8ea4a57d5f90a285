#include "bnac/learning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace bnac {

namespace {

using Clock = std::chrono::steady_clock;

struct CaseStats {
  double log_pr = 0.0;
  std::vector<std::vector<double>> counts;  // per learnable CPT, in set order
};

std::vector<VarId> learnable_list(const BayesianNetwork& net) {
  return {net.learnable().begin(), net.learnable().end()};
}

CaseStats case_stats(const LearningProblem& p, std::size_t k, const ParamTables& params,
                     const std::vector<VarId>& learn) {
  const ArithmeticCircuit& ac = p.circuits[k];
  EvalResult r = differentiate(ac, Evidence{}, params);
  if (!(r.value > 0.0))
    throw Error(ErrorKind::inconsistent_evidence,
                "case " + p.cases[k].name + " has probability zero under the current parameters");
  CaseStats out;
  out.log_pr = std::log(r.value);
  for (VarId v : learn) out.counts.push_back(family_marginals(ac, r, v));
  return out;
}

}  // namespace

LearningProblem make_learning_problem(std::shared_ptr<const BayesianNetwork> net,
                                      std::vector<NamedCase> cases, const EmOptions& opts,
                                      PipelineOptions pipeline) {
  if (net->learnable().empty()) throw Error(ErrorKind::invalid_model, "no learnable CPTs");
  if (cases.empty()) throw Error(ErrorKind::usage, "no cases to learn from");
  const auto start = Clock::now();
  std::set<VarId> query;
  for (VarId v : net->learnable()) {
    query.insert(v);
    for (VarId u : net->cpt(v).parents) query.insert(u);
  }
  pipeline.query_vars = query;
  LearningProblem p;
  p.net = net;
  p.options = opts;
  p.circuits.reserve(cases.size());
  for (const auto& c : cases) {
    CompiledModel m = compile_network(net, c.evidence, pipeline);
    if (m.report.inconsistent)
      throw Error(ErrorKind::inconsistent_evidence, "case " + c.name + " contradicts the network");
    p.circuits.push_back(std::move(m.circuit));
  }
  p.cases = std::move(cases);
  p.offline_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return p;
}

ParamTables initial_params(const BayesianNetwork& net, std::optional<std::uint64_t> seed) {
  ParamTables out(net.size());
  std::mt19937_64 rng(seed.value_or(0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (VarId v : net.learnable()) {
    const int card = net.card(v);
    auto& t = out[v];
    t.resize(net.row_count(v) * card);
    for (std::size_t r = 0; r < net.row_count(v); ++r) {
      double sum = 0.0;
      for (int s = 0; s < card; ++s) {
        double x = 1.0;
        if (seed) do x = unit(rng);
          while (x <= 1e-3);
        t[r * card + s] = x;
        sum += x;
      }
      for (int s = 0; s < card; ++s) t[r * card + s] /= sum;
    }
  }
  return out;
}

void check_initial_params(const BayesianNetwork& net, const ParamTables& params) {
  for (VarId v : net.learnable()) {
    const auto& name = net.variable(v).name;
    if (static_cast<std::size_t>(v) >= params.size() || params[v].size() != net.cpt(v).table.size())
      throw Error(ErrorKind::invalid_model, "initial parameters for " + name + " missing or misshapen");
    const int card = net.card(v);
    for (std::size_t r = 0; r < net.row_count(v); ++r) {
      double sum = 0.0;
      for (int s = 0; s < card; ++s) {
        const double x = params[v][r * card + s];
        if (!(x > 0.0 && x < 1.0))
          throw Error(ErrorKind::invalid_model,
                      "initial parameter of learnable " + name + " must lie strictly between 0 and 1");
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw Error(ErrorKind::invalid_model, "initial row of " + name + " does not sum to 1");
    }
  }
}

EmStepResult em_step(const LearningProblem& problem, const ParamTables& params) {
  return em_step(problem, params, problem.options.exec);
}

EmStepResult em_step(const LearningProblem& problem, const ParamTables& params, Exec exec) {
  const BayesianNetwork& net = *problem.net;
  const auto learn = learnable_list(net);
  const long n = static_cast<long>(problem.circuits.size());
  std::vector<CaseStats> stats(n);
  if (exec == Exec::serial) {
    for (long k = 0; k < n; ++k) stats[k] = case_stats(problem, k, params, learn);
  } else {
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < n; ++k) {
      try {
        stats[k] = case_stats(problem, k, params, learn);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  EmStepResult out;
  out.params = params;
  out.counts.resize(learn.size());
  for (std::size_t i = 0; i < learn.size(); ++i)
    out.counts[i].assign(net.cpt(learn[i]).table.size(), 0.0);
  for (const auto& s : stats) {
    out.log_likelihood += s.log_pr;
    for (std::size_t i = 0; i < learn.size(); ++i)
      for (std::size_t j = 0; j < s.counts[i].size(); ++j) out.counts[i][j] += s.counts[i][j];
  }
  const double damp = problem.options.damping.value_or(1.0);
  for (std::size_t i = 0; i < learn.size(); ++i) {
    const VarId v = learn[i];
    const int card = net.card(v);
    auto& t = out.params[v];
    const auto& N = out.counts[i];
    for (std::size_t r = 0; r < net.row_count(v); ++r) {
      double total = 0.0;
      for (int s = 0; s < card; ++s) total += N[r * card + s];
      if (!(total > 0.0)) continue;
      for (int s = 0; s < card; ++s) {
        const double em = N[r * card + s] / total;
        t[r * card + s] = damp == 1.0 ? em : (1.0 - damp) * t[r * card + s] + damp * em;
      }
    }
  }
  return out;
}

double log_likelihood(const LearningProblem& problem, const ParamTables& params) {
  double ll = 0.0;
  for (std::size_t k = 0; k < problem.circuits.size(); ++k) {
    const double pr = evaluate(problem.circuits[k], Evidence{}, params);
    if (!(pr > 0.0))
      throw Error(ErrorKind::inconsistent_evidence,
                  "case " + problem.cases[k].name + " has probability zero under the current parameters");
    ll += std::log(pr);
  }
  return ll;
}

EmStepResult gradient_step(const LearningProblem& problem, const ParamTables& params, double rate) {
  const BayesianNetwork& net = *problem.net;
  const auto learn = learnable_list(net);
  EmStepResult em = em_step(problem, params, problem.options.exec);
  EmStepResult out;
  out.log_likelihood = em.log_likelihood;
  out.counts = std::move(em.counts);
  out.params = params;
  for (std::size_t i = 0; i < learn.size(); ++i) {
    const VarId v = learn[i];
    const int card = net.card(v);
    auto& t = out.params[v];
    const auto& N = out.counts[i];
    for (std::size_t r = 0; r < net.row_count(v); ++r) {
      double total = 0.0;
      for (int s = 0; s < card; ++s) total += N[r * card + s];
      std::vector<double> w(card);
      double top = -INFINITY;
      for (int s = 0; s < card; ++s) {
        const double theta = params[v][r * card + s];
        w[s] = std::log(theta) + rate * (N[r * card + s] - theta * total);
        top = std::max(top, w[s]);
      }
      double z = 0.0;
      for (int s = 0; s < card; ++s) z += std::exp(w[s] - top);
      for (int s = 0; s < card; ++s) t[r * card + s] = std::exp(w[s] - top) / z;
    }
  }
  return out;
}

EmTrace run_em(const LearningProblem& problem, const ParamTables& initial) {
  check_initial_params(*problem.net, initial);
  const auto& opts = problem.options;
  EmTrace trace;
  trace.params = initial;
  for (int it = 0; it < opts.max_iters; ++it) {
    const auto t0 = Clock::now();
    EmStepResult step = em_step(problem, trace.params, opts.exec);
    trace.iteration_seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
    trace.log_likelihood.push_back(step.log_likelihood);
    const std::size_t k = trace.log_likelihood.size();
    if (k >= 2 && std::abs(trace.log_likelihood[k - 1] - trace.log_likelihood[k - 2]) < opts.tol) {
      trace.converged = true;
      return trace;
    }
    double delta = 0.0;
    for (VarId v : problem.net->learnable())
      for (std::size_t j = 0; j < step.params[v].size(); ++j)
        delta = std::max(delta, std::abs(step.params[v][j] - trace.params[v][j]));
    if (delta < opts.tol) {
      trace.converged = true;
      return trace;
    }
    trace.params = std::move(step.params);
    ++trace.iterations;
  }
  trace.log_likelihood.push_back(log_likelihood(problem, trace.params));
  return trace;
}

}  // namespace bnac
