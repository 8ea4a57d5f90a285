#pragma once

// Maximum-likelihood estimation of learnable CPTs by EM over compiled
// circuits, one circuit per evidence case, compiled once.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bnac/circuit.hpp"
#include "bnac/io.hpp"
#include "bnac/pipeline.hpp"

namespace bnac {

struct EmOptions {
  int max_iters = 100;
  double tol = 1e-9;
  // theta <- (1 - damping) theta + damping theta_em when set.
  std::optional<double> damping;
  Exec exec = Exec::serial;
};

struct LearningProblem {
  std::shared_ptr<const BayesianNetwork> net;
  std::vector<NamedCase> cases;
  std::vector<ArithmeticCircuit> circuits;
  EmOptions options;
  double offline_seconds = 0.0;
};

// Compiles one circuit per case with the learnable families as query
// variables. Throws invalid_model when nothing is learnable and
// inconsistent_evidence when a case is impossible under the fixed CPTs.
LearningProblem make_learning_problem(std::shared_ptr<const BayesianNetwork> net,
                                      std::vector<NamedCase> cases, const EmOptions& opts = {},
                                      PipelineOptions pipeline = {});

// Learnable rows uniform, or drawn at random from (0, 1) and normalized.
ParamTables initial_params(const BayesianNetwork& net, std::optional<std::uint64_t> seed = {});
// Learnable tables must be full, valid rows with no entry exactly 0 or 1.
void check_initial_params(const BayesianNetwork& net, const ParamTables& params);

struct EmStepResult {
  ParamTables params;
  double log_likelihood = 0.0;  // of the parameters passed in
  std::vector<std::vector<double>> counts;  // expected counts per learnable CPT
};

// Throws inconsistent_evidence naming the first case of probability zero.
EmStepResult em_step(const LearningProblem& problem, const ParamTables& params);
EmStepResult em_step(const LearningProblem& problem, const ParamTables& params, Exec exec);

double log_likelihood(const LearningProblem& problem, const ParamTables& params);

// One ascent step on log-likelihood in the softmax parameterization
// theta_x = exp(w_x) / sum exp(w). The gradient in w is N(x,u) - theta N(u).
EmStepResult gradient_step(const LearningProblem& problem, const ParamTables& params, double rate);

struct EmTrace {
  // Log-likelihood of the parameters entering each iteration, then of the
  // final parameters.
  std::vector<double> log_likelihood;
  std::vector<double> iteration_seconds;
  ParamTables params;
  bool converged = false;
  int iterations = 0;  // updates that changed the parameters
};

EmTrace run_em(const LearningProblem& problem, const ParamTables& initial);

}  // namespace bnac
