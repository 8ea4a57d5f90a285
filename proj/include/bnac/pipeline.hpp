#pragma once

// Offline pipeline: prune, encode, simplify, learn evidence, reprune,
// compile, extract.

#include <memory>
#include <optional>
#include <set>

#include "bnac/circuit.hpp"
#include "bnac/compiler.hpp"
#include "bnac/logic.hpp"
#include "bnac/pruning.hpp"

namespace bnac {

struct PipelineOptions {
  // Variables whose marginals must survive pruning; all variables when unset.
  std::optional<std::set<VarId>> query_vars;
  bool refinements = true;
  bool learned_evidence = true;
  int rounds = 3;  // cap on prune/learn rounds
  // Clauses longer than this are chained through auxiliary variables before
  // compiling; below 3 disables chaining.
  int chain_clauses_over = 8;
  CompileOptions compile;
  // When false, stop after learned-evidence repruning; the circuit stays empty.
  bool compile_circuit = true;
};

struct PipelineReport {
  PruneReport prune;
  Evidence learned;  // everything learned, assignments and constraints
  int rounds = 0;
  int active_variables = 0;
  std::size_t cnf_vars = 0;
  std::size_t cnf_clauses = 0;
  std::size_t simplified_clauses = 0;
  CompileStats compile;
  bool inconsistent = false;  // evidence contradicted by determinism
  double prune_seconds = 0.0;
  double encode_seconds = 0.0;
  double simplify_seconds = 0.0;
  double compile_seconds = 0.0;
  double extract_seconds = 0.0;
  double offline_seconds = 0.0;
};

struct CompiledModel {
  ArithmeticCircuit circuit;
  PipelineReport report;
  PrunedNetwork pruned;
  WeightedCnf cnf;   // the CNF handed to the compiler
  DdnnfGraph graph;  // its d-DNNF
};

CompiledModel compile_network(std::shared_ptr<const BayesianNetwork> net, const Evidence& ev,
                              const PipelineOptions& opts = {});

}  // namespace bnac
