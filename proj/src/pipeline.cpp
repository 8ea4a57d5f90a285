#include "bnac/pipeline.hpp"

#include <algorithm>
#include <chrono>

namespace bnac {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

}  // namespace

CompiledModel compile_network(std::shared_ptr<const BayesianNetwork> net, const Evidence& ev,
                              const PipelineOptions& opts) {
  check_evidence(*net, ev);
  const auto start = Clock::now();
  CompiledModel out;
  PipelineReport& rep = out.report;

  std::set<VarId> query;
  if (opts.query_vars) {
    query = *opts.query_vars;
  } else {
    for (VarId v = 0; v < net->size(); ++v) query.insert(v);
  }
  EncodeOptions enc;
  enc.refinements = opts.refinements;

  Evidence current = ev;
  auto t = Clock::now();
  PruneResult pr = classical_prune(net, current, query);
  rep.prune_seconds += since(t);
  WeightedCnf cnf;
  PropagationResult prop;
  for (rep.rounds = 1;; ++rep.rounds) {
    t = Clock::now();
    cnf = encode(pr.network, current, enc);
    rep.encode_seconds += since(t);
    t = Clock::now();
    prop = unit_propagate(cnf);
    rep.simplify_seconds += since(t);
    if (prop.conflict) {
      rep.inconsistent = true;
      break;
    }
    Evidence learned = learned_evidence(prop, current);
    for (const auto& c : learned.constraints)
      if (std::find(rep.learned.constraints.begin(), rep.learned.constraints.end(), c) ==
          rep.learned.constraints.end())
        rep.learned.constraints.push_back(c);
    Evidence assigned;
    assigned.assignments = learned.assignments;
    rep.learned.merge(assigned);
    if (!opts.learned_evidence || learned.assignments.empty() || rep.rounds >= opts.rounds) break;
    current.merge(assigned);
    t = Clock::now();
    pr = classical_prune(net, current, query);
    rep.prune_seconds += since(t);
  }
  rep.prune = pr.report;
  rep.active_variables = pr.network.active_count();
  rep.cnf_vars = static_cast<std::size_t>(cnf.num_vars);
  rep.cnf_clauses = cnf.clauses.size();

  if (!opts.compile_circuit) {
    out.pruned = std::move(pr.network);
    rep.offline_seconds = since(start);
    return out;
  }

  DdnnfGraph graph;
  WeightedCnf simp;
  if (rep.inconsistent) {
    graph.root = graph.add(NnfKind::false_node, 0, {});
    simp = cnf;
  } else {
    t = Clock::now();
    simp = remove_subsumed(prop.simplified);
    rep.simplify_seconds += since(t);
    rep.simplified_clauses = simp.clauses.size();
    simp = chain_long_clauses(simp, opts.chain_clauses_over);
    t = Clock::now();
    CompileResult cr = compile(simp, opts.compile);
    rep.compile_seconds = since(t);
    rep.compile = cr.stats;
    graph = std::move(cr.graph);
  }

  t = Clock::now();
  const auto universe = simp.free_vars();
  out.circuit = extract(graph, simp, *net, pr.network.active(), universe);
  out.circuit.evidence_baked = ev;
  rep.extract_seconds = since(t);
  out.pruned = std::move(pr.network);
  out.cnf = std::move(simp);
  out.graph = std::move(graph);
  rep.offline_seconds = since(start);
  return out;
}

}  // namespace bnac
