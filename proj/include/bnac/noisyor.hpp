#pragma once

// Two-level noisy-or diagnosis networks: decomposition into a deterministic
// network, the quickscore baseline, a random generator, and the auxiliary
// variable transform for context-specific independence.

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include "bnac/model.hpp"

namespace bnac {

struct NoisyOrLink {
  int disease = 0;
  int feature = 0;
  double p = 0.0;  // probability that a present disease activates the feature
};

struct NoisyOrNetwork {
  std::vector<double> prior;  // per disease
  int features = 0;
  std::vector<NoisyOrLink> links;
  std::vector<double> leak;  // per feature, or empty for no leak

  int diseases() const { return static_cast<int>(prior.size()); }
  // Throws invalid_model on bad probabilities, endpoints or duplicate links.
  void validate() const;
  // Links of each feature, in link order.
  std::vector<std::vector<int>> links_by_feature() const;
};

struct Findings {
  std::vector<int> positive;
  std::vector<int> negative;
  void validate(int features) const;
};

// Variable ids of the decomposed network.
struct DecomposedIds {
  std::vector<VarId> disease;
  std::vector<VarId> feature;
  std::vector<VarId> cause;   // c per link
  std::vector<VarId> active;  // a per link
  std::vector<VarId> leak;    // per feature, -1 without leak
};

// Per link, a root c with Pr(c = yes) = p and a = d AND c; each feature is the
// OR of its a variables (and its leak root). States are "n" then "y".
BayesianNetwork decompose(const NoisyOrNetwork& nor, DecomposedIds* ids = nullptr);

// The noisy-or model as a plain network with full feature CPTs. Only
// sensible for features with few causes.
BayesianNetwork direct_network(const NoisyOrNetwork& nor);

Evidence findings_evidence(const DecomposedIds& ids, const Findings& f);

// The inclusion-exclusion sum cancels heavily when negative findings make
// positive ones unlikely. A long double pass estimates the cancellation; if
// the posterior error bound exceeds `tolerance` the sum is redone in
// multiprecision with enough bits. A positive `precision_bits` forces that
// working precision instead.
struct QuickscoreOptions {
  int max_positive = 22;
  int precision_bits = 0;
  double tolerance = 1e-12;
  int max_precision_bits = 1 << 14;
};

struct QuickscoreResult {
  std::vector<double> posterior;  // Pr(d_i present | findings)
  long double evidence_probability = 0.0L;
  std::uint64_t subsets = 0;
  int precision_bits = 0;  // working precision of the final pass
  double error_bound = 0.0;  // estimated absolute error of the posteriors
};

QuickscoreResult quickscore(const NoisyOrNetwork& nor, const Findings& f,
                            const QuickscoreOptions& opts = {});

struct GeneratedProblem {
  NoisyOrNetwork network;
  Findings findings;
};

// Causes drawn uniformly without replacement, probabilities uniform on (0, 1),
// m_plus features positive and the rest negative.
GeneratedProblem generate(int n, int m, int causes_per_feature, int m_plus, std::uint64_t seed);

// Inserts a deterministic variable S between the parents of `child` and
// `child`, with one state per block of `blocks` (original parent rows). Rows
// in a block must share their child distribution. S is appended last.
BayesianNetwork csi_transform(const BayesianNetwork& net, VarId child,
                              const std::vector<std::vector<std::size_t>>& blocks);

// "diseases <n>", "features <m>", "prior <i> <p>", "link <i> <j> <p>", "leak <j> <p>".
void write_noisy_or(const NoisyOrNetwork& nor, std::ostream& out);
NoisyOrNetwork parse_noisy_or(std::string_view text);
// "+ <j>" and "- <j>" lines.
void write_findings(const Findings& f, std::ostream& out);
Findings parse_findings(std::string_view text);

}  // namespace bnac
