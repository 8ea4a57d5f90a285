#pragma once

// CNF to d-DNNF compilation by recursive conditioning over a dtree.
//
// The compiler walks a dtree built from a minfill elimination order. At every
// step it runs unit resolution, splits the current subproblem into its two
// dtree children as soon as no unassigned variable links them, and otherwise
// branches on a linking variable. Subproblems are cached per dtree node under
// the current values of the node's context (variables it shares with the rest
// of the CNF).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "bnac/encoder.hpp"

namespace bnac {

class BayesianNetwork;

struct InteractionGraph {
  std::vector<std::vector<int>> adj;  // sorted, symmetric, no self loops
  std::vector<double> log_size;       // log2 of each node's domain size

  int size() const { return static_cast<int>(adj.size()); }
  void add_edge(int a, int b);

  // Node i stands for Boolean variable i+1; every variable counts one bit.
  // Only clauses of `cnf` contribute edges.
  static InteractionGraph from_cnf(const WeightedCnf& cnf);
  // Moral graph; node i is network variable i with log2(card) bits.
  static InteractionGraph from_network(const BayesianNetwork& net);
};

struct MinfillResult {
  std::vector<int> order;
  // Max over elimination steps of the summed log2 sizes of the eliminated
  // node and its neighbors at that time.
  double max_cluster = 0.0;
};

// Greedy minfill; ties go to the lowest node id, or to a seeded random
// ranking when `seed` is nonzero.
MinfillResult minfill_order(const InteractionGraph& graph, std::uint64_t seed = 0);

struct DtreeNode {
  int left = -1;
  int right = -1;
  int parent = -1;
  int clause = -1;  // leaves only
  // Leaves of this subtree occupy positions [begin, end) of Dtree::leaf_clauses.
  int begin = 0;
  int end = 0;
  bool is_leaf() const { return left < 0; }
};

struct Dtree {
  std::vector<DtreeNode> nodes;
  int root = -1;
  std::vector<int> leaf_clauses;  // clause indices in leaf order
  // Variables occurring on both sides of each internal node.
  std::vector<std::vector<int>> separator;
  // Variables each node shares with clauses outside its subtree.
  std::vector<std::vector<int>> context;
  // Elimination position of each Boolean variable (index by variable id).
  std::vector<int> position;

  bool empty() const { return root < 0; }
  int width() const;  // largest separator
};

// Builds a dtree over the nonempty clauses of `cnf`. `order` lists Boolean
// variable ids (1-based); variables missing from it are eliminated last.
Dtree build_dtree(const WeightedCnf& cnf, const std::vector<int>& order);

enum class NnfKind : std::uint8_t { false_node, true_node, literal, and_node, or_node };

struct NnfNode {
  NnfKind kind = NnfKind::true_node;
  int lit = 0;  // literal, or decision variable of an Or node (0 if unknown)
  std::uint32_t first = 0;
  std::uint32_t count = 0;
};

// Node arena with children stored before parents.
class DdnnfGraph {
 public:
  int num_vars = 0;
  int root = -1;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const NnfNode& node(int i) const { return nodes_[i]; }
  std::span<const int> children(int i) const {
    return {edges_.data() + nodes_[i].first, nodes_[i].count};
  }

  // Raw construction without simplification (used by readers and tests).
  int add(NnfKind kind, int lit, std::span<const int> kids);

 private:
  std::vector<NnfNode> nodes_;
  std::vector<int> edges_;
};

struct CompileStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  std::size_t decisions = 0;
  double max_cluster = 0.0;
  int dtree_width = 0;
  double seconds = 0.0;
};

struct CompileOptions {
  std::size_t node_budget = 50'000'000;  // edges
  bool use_cache = true;
  // Minfill runs with different tie-breaking; the smallest max cluster wins.
  int order_trials = 1;
};

struct CompileResult {
  DdnnfGraph graph;
  CompileStats stats;
};

// Precondition: `dtree` was built from `cnf`. Variables fixed in `cnf` are
// treated as already assigned and never appear in the output.
CompileResult compile(const WeightedCnf& cnf, const Dtree& dtree, const CompileOptions& opts = {});
// Minfill ordering on the CNF interaction graph, dtree, then compile.
CompileResult compile(const WeightedCnf& cnf, const CompileOptions& opts = {});

// Variables mentioned below each node, sorted.
std::vector<std::vector<int>> node_variables(const DdnnfGraph& g);

// Weighted count of the graph smoothed over `universe`: a variable missing
// from one side of an Or, or from the root, contributes (1 + weight).
// `weights` is indexed by variable id; negative literals weigh 1.
double ddnnf_weighted_count(const DdnnfGraph& g, std::span<const double> weights,
                            std::span<const int> universe);
double ddnnf_model_count(const DdnnfGraph& g, std::span<const int> universe);

struct VerifyReport {
  std::size_t decomposability_violations = 0;
  std::size_t determinism_violations = 0;
  bool counted = false;  // model counts were compared
  double graph_count = 0.0;
  double cnf_count = 0.0;
  bool ok() const {
    return decomposability_violations == 0 && determinism_violations == 0 &&
           (!counted || graph_count == cnf_count);
  }
};

// Structural checks always; model-count equivalence when `cnf` has at most
// `count_bound` free variables.
VerifyReport verify_ddnnf(const DdnnfGraph& g, const WeightedCnf& cnf, int count_bound = 24);

// "nnf <nodes> <edges> <vars>" followed by L / A / O records.
void write_nnf(const DdnnfGraph& g, std::ostream& out);
DdnnfGraph read_nnf(std::istream& in);

}  // namespace bnac
