#pragma once

#include <memory>
#include <random>
#include <string>

#include "bnac/model.hpp"

namespace bnac::testing {

using Rng = std::mt19937_64;

std::string data_path(const std::string& name);
std::shared_ptr<BayesianNetwork> load_fixture(const std::string& name);

struct RandomNetSpec {
  int min_vars = 2;
  int max_vars = 10;
  int max_states = 4;
  int max_parents = 3;
  double zero_prob = 0.3;  // chance that a CPT entry is forced to zero
};

BayesianNetwork random_network(Rng& rng, const RandomNetSpec& spec = {});

// Assigns each variable with probability `assign_prob`; adds up to
// `max_constraints` disjunctions of one to three atoms.
Evidence random_evidence(Rng& rng, const BayesianNetwork& net, double assign_prob = 0.3,
                         int max_constraints = 2);

// Evidence drawn from a forward sample, so it has positive probability.
Evidence sampled_evidence(Rng& rng, const BayesianNetwork& net, double assign_prob);

// Random strictly positive rows for every CPT in `vars`.
void randomize_cpts(Rng& rng, BayesianNetwork& net, const std::set<VarId>& vars);

double rel_err(double a, double b);

}  // namespace bnac::testing
