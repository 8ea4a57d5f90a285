#pragma once

// Run reports and the benchmark harness behind the bench subcommand.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bnac/noisyor.hpp"
#include "bnac/pipeline.hpp"

namespace bnac {

// log2 minfill cluster sizes on the moral graph.
struct ClusterStats {
  double original = 0.0;
  double pruned = 0.0;   // after classical pruning
  double learned = 0.0;  // after repruning with learned evidence
  int variables_original = 0;
  int variables_pruned = 0;
  int variables_learned = 0;
  Evidence learned_evidence;
  bool inconsistent = false;
};

ClusterStats cluster_stats(std::shared_ptr<const BayesianNetwork> net, const Evidence& ev,
                           const PipelineOptions& opts = {});

struct RunReport {
  std::string name;
  double max_cluster = 0.0;  // log2, classically pruned network
  double offline_seconds = 0.0;
  std::size_t ac_edges = 0;
  double online_seconds = 0.0;  // one full marginal query
  double pr_evidence = 0.0;
  std::size_t learned_assignments = 0;
  bool inconsistent = false;
  // Noisy-or runs only.
  int m_plus = -1;
  std::uint64_t seed = 0;
  double quickscore_seconds = -1.0;
  int quickscore_bits = 0;
  double max_posterior_diff = -1.0;  // against quickscore, when checked
};

// Mean seconds of evaluate + differentiate + all marginals, repeated until at
// least `min_seconds` have elapsed.
double time_online_query(const ArithmeticCircuit& ac, double min_seconds);

RunReport run_network(const std::string& name, std::shared_ptr<const BayesianNetwork> net,
                      const Evidence& ev, const PipelineOptions& opts = {}, double min_online = 0.05);

struct NoisyOrRunOptions {
  bool verify = false;  // compare posteriors with quickscore
  bool quickscore = true;
  int quickscore_bits = 0;  // 0 picks the precision adaptively
  double min_seconds = 0.05;
  PipelineOptions pipeline;
};

RunReport run_noisy_or(const std::string& name, const NoisyOrNetwork& nor, const Findings& f,
                       const NoisyOrRunOptions& opts);

// Manifest lines:
//   bn <name> <network file> [<evidence file>]
//   noisyor <name> <n> <m> <causes per feature> <m+> <seed>
// Paths are relative to `base_dir`.
struct ManifestEntry {
  std::string kind;
  std::string name;
  std::string network;
  std::string evidence;
  int n = 0, m = 0, causes = 0, m_plus = 0;
  std::uint64_t seed = 0;
};

std::vector<ManifestEntry> parse_manifest(std::string_view text);
std::vector<RunReport> run_manifest(const std::vector<ManifestEntry>& entries, const std::string& base_dir,
                                    const NoisyOrRunOptions& opts);

struct SweepOptions {
  int n = 120;
  int m = 400;
  int causes = 11;
  std::vector<int> m_plus{0, 3, 6, 9, 12};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int verify_up_to = 6;
  // One working precision for every quickscore run keeps per-subset cost
  // comparable across the sweep.
  int quickscore_bits = 768;
  double min_seconds = 0.05;
  PipelineOptions pipeline;
};

struct SweepSummary {
  std::vector<RunReport> rows;
  // Least-squares fit of log2(mean quickscore seconds) against m+, as the
  // cost factor per unit of m+.
  double quickscore_growth = 0.0;
  // Largest over smallest mean online query time across the sweep.
  double online_ratio = 0.0;
  double max_posterior_diff = 0.0;
  double seconds = 0.0;
};

SweepSummary noisy_or_sweep(const SweepOptions& opts);

enum class ReportFormat { text, tsv };
void write_reports(const std::vector<RunReport>& rows, ReportFormat format, std::ostream& out);

}  // namespace bnac
