#include "support.hpp"

#include <algorithm>
#include <cmath>

#include "bnac/io.hpp"

namespace bnac::testing {

std::string data_path(const std::string& name) { return std::string(BNAC_TEST_DATA) + "/" + name; }

std::shared_ptr<BayesianNetwork> load_fixture(const std::string& name) {
  return std::make_shared<BayesianNetwork>(parse_network(read_file(data_path(name))));
}

namespace {

std::vector<double> random_row(Rng& rng, int card, double zero_prob) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> row(card);
  for (;;) {
    double sum = 0.0;
    for (auto& x : row) {
      x = u(rng) < zero_prob ? 0.0 : 0.05 + u(rng);
      sum += x;
    }
    if (sum == 0.0) continue;
    for (auto& x : row) x /= sum;
    return row;
  }
}

}  // namespace

BayesianNetwork random_network(Rng& rng, const RandomNetSpec& spec) {
  BayesianNetwork net;
  std::uniform_int_distribution<int> nvars(spec.min_vars, spec.max_vars);
  std::uniform_int_distribution<int> nstates(2, spec.max_states);
  const int n = nvars(rng);
  for (int v = 0; v < n; ++v) {
    std::vector<std::string> states;
    const int card = nstates(rng);
    for (int s = 0; s < card; ++s) states.push_back("s" + std::to_string(s));
    net.add_variable("X" + std::to_string(v), states);
  }
  for (VarId v = 0; v < n; ++v) {
    std::vector<VarId> pool(v);
    for (VarId p = 0; p < v; ++p) pool[p] = p;
    std::shuffle(pool.begin(), pool.end(), rng);
    const int k = std::uniform_int_distribution<int>(0, std::min<int>(spec.max_parents, v))(rng);
    std::vector<VarId> parents(pool.begin(), pool.begin() + k);
    std::sort(parents.begin(), parents.end());
    std::size_t rows = 1;
    for (VarId p : parents) rows *= net.card(p);
    std::vector<double> table;
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = random_row(rng, net.card(v), spec.zero_prob);
      table.insert(table.end(), row.begin(), row.end());
    }
    net.set_cpt(v, parents, table);
  }
  return net;
}

Evidence random_evidence(Rng& rng, const BayesianNetwork& net, double assign_prob,
                         int max_constraints) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Evidence ev;
  for (VarId v = 0; v < net.size(); ++v)
    if (u(rng) < assign_prob)
      ev.assignments[v] = std::uniform_int_distribution<int>(0, net.card(v) - 1)(rng);
  const int nc = std::uniform_int_distribution<int>(0, max_constraints)(rng);
  for (int c = 0; c < nc; ++c) {
    std::vector<Atom> clause;
    const int len = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < len; ++i) {
      VarId v = std::uniform_int_distribution<int>(0, net.size() - 1)(rng);
      clause.push_back({v, std::uniform_int_distribution<int>(0, net.card(v) - 1)(rng)});
    }
    std::sort(clause.begin(), clause.end());
    clause.erase(std::unique(clause.begin(), clause.end()), clause.end());
    ev.constraints.push_back(clause);
  }
  return ev;
}

Evidence sampled_evidence(Rng& rng, const BayesianNetwork& net, double assign_prob) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<StateId> inst(net.size(), 0);
  for (VarId v : net.topological_order()) {
    const std::size_t row = net.row_of(v, inst);
    double r = u(rng), acc = 0.0;
    StateId pick = net.card(v) - 1;
    for (StateId s = 0; s < net.card(v); ++s) {
      acc += net.theta(v, row, s);
      if (r < acc && net.theta(v, row, s) > 0) {
        pick = s;
        break;
      }
    }
    while (net.theta(v, row, pick) == 0.0) --pick;
    inst[v] = pick;
  }
  Evidence ev;
  for (VarId v = 0; v < net.size(); ++v)
    if (u(rng) < assign_prob) ev.assignments[v] = inst[v];
  return ev;
}

void randomize_cpts(Rng& rng, BayesianNetwork& net, const std::set<VarId>& vars) {
  for (VarId v : vars) {
    auto& table = net.mutable_cpt(v).table;
    const int card = net.card(v);
    for (std::size_t r = 0; r < table.size() / card; ++r) {
      auto row = random_row(rng, card, 0.0);
      std::copy(row.begin(), row.end(), table.begin() + r * card);
    }
  }
}

double rel_err(double a, double b) {
  const double m = std::max(std::abs(a), std::abs(b));
  return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

}  // namespace bnac::testing
