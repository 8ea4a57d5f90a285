#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bnac/circuit.hpp"
#include "bnac/io.hpp"
#include "bnac/learning.hpp"
#include "bnac/noisyor.hpp"
#include "bnac/pipeline.hpp"
#include "bnac/report.hpp"

using namespace bnac;

namespace {

struct Common {
  std::string net;
  std::string evidence;
  std::vector<std::string> query_vars;
  std::string out;
  std::uint64_t seed = 1;
  std::string format = "text";
  bool verify = false;
  std::size_t node_budget = CompileOptions{}.node_budget;
  bool no_refinements = false;
  bool no_learned = false;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ReportFormat report_format(const Common& c) {
  return c.format == "tsv" ? ReportFormat::tsv : ReportFormat::text;
}

std::shared_ptr<const BayesianNetwork> load_network(const std::string& path) {
  if (path.empty()) throw Error(ErrorKind::usage, "--net is required");
  return std::make_shared<const BayesianNetwork>(parse_network(read_file(path)));
}

Evidence load_evidence(const std::string& path, const BayesianNetwork& net) {
  if (path.empty()) return {};
  return parse_evidence(read_file(path), net);
}

// Query variable names may be given repeatedly or comma separated.
std::vector<std::string> split_names(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& r : raw) {
    std::stringstream ss(r);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(item);
  }
  return out;
}

PipelineOptions pipeline_options(const Common& c, const BayesianNetwork& net) {
  PipelineOptions o;
  o.refinements = !c.no_refinements;
  o.learned_evidence = !c.no_learned;
  o.compile.node_budget = c.node_budget;
  auto names = split_names(c.query_vars);
  if (!names.empty()) {
    std::set<VarId> q;
    for (const auto& n : names) {
      auto v = net.find(n);
      if (!v) throw Error(ErrorKind::usage, "unknown query variable " + n);
      q.insert(*v);
    }
    o.query_vars = q;
  }
  return o;
}

void print_marginals(const std::vector<Variable>& vars, const std::vector<std::vector<double>>& marg,
                     const std::vector<std::string>& only, std::ostream& out) {
  for (const auto& v : vars) {
    if (marg[v.id].empty()) continue;
    if (!only.empty() && std::find(only.begin(), only.end(), v.name) == only.end()) continue;
    out << "marginal " << v.name;
    for (int s = 0; s < v.card(); ++s) out << ' ' << v.states[s] << '=' << fmt(marg[v.id][s]);
    out << '\n';
  }
}

int cmd_compile(const Common& c, const std::string& dimacs, const std::string& nnf) {
  auto net = load_network(c.net);
  Evidence ev = load_evidence(c.evidence, *net);
  CompiledModel m = compile_network(net, ev, pipeline_options(c, *net));
  const auto& r = m.report;
  if (!c.out.empty()) {
    std::ostringstream ss;
    write_ac(m.circuit, ss);
    write_file(c.out, ss.str());
  }
  if (!dimacs.empty()) {
    std::ostringstream ss;
    write_dimacs(m.cnf, ss);
    write_file(dimacs, ss.str());
  }
  if (!nnf.empty()) {
    std::ostringstream ss;
    write_nnf(m.graph, ss);
    write_file(nnf, ss.str());
  }
  const double pr = evaluate(m.circuit, Evidence{});
  std::cout << "pr " << fmt(pr) << '\n'
            << "status " << (r.inconsistent ? "inconsistent-evidence" : "ok") << '\n'
            << "active_variables " << r.active_variables << '\n'
            << "learned_assignments " << r.learned.assignments.size() << '\n'
            << "learned_constraints " << r.learned.constraints.size() << '\n'
            << "rounds " << r.rounds << '\n'
            << "cnf_vars " << r.cnf_vars << '\n'
            << "cnf_clauses " << r.cnf_clauses << '\n'
            << "simplified_clauses " << r.simplified_clauses << '\n'
            << "max_cluster " << r.compile.max_cluster << '\n'
            << "dtree_width " << r.compile.dtree_width << '\n'
            << "ddnnf_edges " << r.compile.edges << '\n'
            << "ac_nodes " << m.circuit.node_count() << '\n'
            << "ac_edges " << m.circuit.edge_count() << '\n'
            << "offline_seconds " << r.offline_seconds << '\n';
  if (c.verify) {
    VerifyReport v = verify_ddnnf(m.graph, m.cnf);
    std::cout << "verify " << (v.ok() ? "ok" : "failed") << " decomposability_violations "
              << v.decomposability_violations << " determinism_violations " << v.determinism_violations;
    if (v.counted) std::cout << " models " << v.graph_count << " expected " << v.cnf_count;
    std::cout << '\n';
    if (!v.ok()) throw Error(ErrorKind::internal, "d-DNNF verification failed");
  }
  return 0;
}

int cmd_query(const Common& c, const std::string& ac_path) {
  if (ac_path.empty()) throw Error(ErrorKind::usage, "--ac is required");
  std::ifstream in(ac_path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + ac_path);
  ArithmeticCircuit ac = read_ac(in);
  Evidence extra;
  if (!c.evidence.empty()) {
    BayesianNetwork shell;
    for (const auto& v : ac.variables) shell.add_variable(v.name, v.states);
    extra = parse_evidence(read_file(c.evidence), shell);
  }
  EvalResult r = differentiate(ac, extra);
  std::cout << "pr " << fmt(r.value) << '\n';
  if (!(r.value > 0.0)) {
    std::cout << "status inconsistent-evidence\n";
    return 3;
  }
  std::cout << "status ok\n";
  print_marginals(ac.variables, variable_marginals(ac, r), split_names(c.query_vars), std::cout);
  return 0;
}

int cmd_em(const Common& c, int max_iters, double tol, bool parallel, bool random_init) {
  auto net = load_network(c.net);
  if (c.evidence.empty()) throw Error(ErrorKind::usage, "--evidence (case file) is required");
  auto cases = parse_cases(read_file(c.evidence), *net);
  EmOptions eo;
  eo.max_iters = max_iters;
  eo.tol = tol;
  eo.exec = parallel ? Exec::parallel : Exec::serial;
  PipelineOptions po = pipeline_options(c, *net);
  LearningProblem p = make_learning_problem(net, std::move(cases), eo, po);
  ParamTables init = random_init ? initial_params(*net, c.seed) : initial_params(*net);
  EmTrace t = run_em(p, init);
  std::cout << "cases " << p.cases.size() << '\n'
            << "offline_seconds " << p.offline_seconds << '\n'
            << "iterations " << t.iterations << '\n'
            << "converged " << (t.converged ? "yes" : "no") << '\n';
  for (std::size_t i = 0; i < t.log_likelihood.size(); ++i)
    std::cout << "loglik " << i << ' ' << fmt(t.log_likelihood[i]) << '\n';
  BayesianNetwork learned = *net;
  for (VarId v : net->learnable()) learned.mutable_cpt(v).table = t.params[v];
  if (!c.out.empty()) {
    std::ostringstream ss;
    write_network(learned, ss);
    write_file(c.out, ss.str());
  } else {
    write_network(learned, std::cout);
  }
  return 0;
}

int cmd_quickscore(const Common& c, int bits) {
  if (c.net.empty() || c.evidence.empty())
    throw Error(ErrorKind::usage, "--net (noisy-or file) and --evidence (findings file) are required");
  NoisyOrNetwork nor = parse_noisy_or(read_file(c.net));
  Findings f = parse_findings(read_file(c.evidence));
  NoisyOrRunOptions ro;
  ro.verify = true;
  ro.quickscore_bits = bits;
  QuickscoreOptions qo;
  qo.precision_bits = bits;
  QuickscoreResult qs = quickscore(nor, f, qo);
  std::cout << "subsets " << qs.subsets << '\n'
            << "precision_bits " << qs.precision_bits << '\n'
            << "pr " << fmt(static_cast<double>(qs.evidence_probability)) << '\n';
  for (int i = 0; i < nor.diseases(); ++i) std::cout << "posterior d" << i << ' ' << fmt(qs.posterior[i]) << '\n';
  if (c.verify) {
    DecomposedIds ids;
    auto net = std::make_shared<const BayesianNetwork>(decompose(nor, &ids));
    PipelineOptions po;
    po.query_vars = std::set<VarId>(ids.disease.begin(), ids.disease.end());
    po.compile.node_budget = c.node_budget;
    CompiledModel m = compile_network(net, findings_evidence(ids, f), po);
    auto marg = variable_marginals(m.circuit, Evidence{});
    double worst = 0.0;
    for (int i = 0; i < nor.diseases(); ++i)
      worst = std::max(worst, std::abs(marg[ids.disease[i]][1] - qs.posterior[i]));
    std::cout << "verify max_diff " << worst << ' ' << (worst <= 1e-8 ? "ok" : "mismatch") << '\n';
    if (worst > 1e-8) throw Error(ErrorKind::internal, "quickscore and compiled posteriors disagree");
  }
  return 0;
}

int cmd_gen(const Common& c, int n, int m, int causes, int m_plus, bool as_bn) {
  if (c.out.empty()) throw Error(ErrorKind::usage, "--out (file prefix) is required");
  GeneratedProblem g = generate(n, m, causes, m_plus, c.seed);
  std::ostringstream a, b;
  write_noisy_or(g.network, a);
  write_findings(g.findings, b);
  write_file(c.out + ".nor", a.str());
  write_file(c.out + ".findings", b.str());
  std::cout << "wrote " << c.out << ".nor " << c.out << ".findings\n";
  if (as_bn) {
    DecomposedIds ids;
    BayesianNetwork net = decompose(g.network, &ids);
    std::ostringstream x, y;
    write_network(net, x);
    write_evidence(findings_evidence(ids, g.findings), net, y);
    write_file(c.out + ".net", x.str());
    write_file(c.out + ".ev", y.str());
    std::cout << "wrote " << c.out << ".net " << c.out << ".ev\n";
  }
  return 0;
}

int cmd_stats(const Common& c) {
  auto net = load_network(c.net);
  Evidence ev = load_evidence(c.evidence, *net);
  ClusterStats s = cluster_stats(net, ev, pipeline_options(c, *net));
  if (report_format(c) == ReportFormat::tsv) {
    std::cout << "original\tpruned\tlearned\tvars_original\tvars_pruned\tvars_learned\tlearned_assignments\n"
              << s.original << '\t' << s.pruned << '\t' << s.learned << '\t' << s.variables_original << '\t'
              << s.variables_pruned << '\t' << s.variables_learned << '\t'
              << s.learned_evidence.assignments.size() << '\n';
  } else {
    std::cout << "max_cluster original " << s.original << " vars " << s.variables_original << '\n'
              << "max_cluster pruned " << s.pruned << " vars " << s.variables_pruned << '\n'
              << "max_cluster learned " << s.learned << " vars " << s.variables_learned << '\n'
              << "learned_assignments " << s.learned_evidence.assignments.size() << '\n'
              << "status " << (s.inconsistent ? "inconsistent-evidence" : "ok") << '\n';
  }
  return 0;
}

int cmd_bench(const Common& c, const std::string& manifest, bool sweep, int n, int m, int causes,
              std::vector<int> m_plus, int seeds) {
  std::vector<RunReport> rows;
  if (sweep) {
    SweepOptions so;
    so.n = n;
    so.m = m;
    so.causes = causes;
    if (!m_plus.empty()) so.m_plus = m_plus;
    so.seeds.clear();
    for (int i = 0; i < seeds; ++i) so.seeds.push_back(c.seed + i);
    so.pipeline.compile.node_budget = c.node_budget;
    SweepSummary s = noisy_or_sweep(so);
    write_reports(s.rows, report_format(c), std::cout);
    std::cout << "# quickscore_growth_per_unit " << s.quickscore_growth << '\n'
              << "# online_ratio " << s.online_ratio << '\n'
              << "# max_posterior_diff " << s.max_posterior_diff << '\n';
    return 0;
  }
  if (manifest.empty()) throw Error(ErrorKind::usage, "--manifest or --sweep is required");
  std::string dir;
  if (auto slash = manifest.rfind('/'); slash != std::string::npos) dir = manifest.substr(0, slash);
  NoisyOrRunOptions ro;
  ro.verify = c.verify;
  ro.pipeline.refinements = !c.no_refinements;
  ro.pipeline.learned_evidence = !c.no_learned;
  ro.pipeline.compile.node_budget = c.node_budget;
  rows = run_manifest(parse_manifest(read_file(manifest)), dir, ro);
  std::ostringstream ss;
  write_reports(rows, report_format(c), ss);
  if (!c.out.empty()) write_file(c.out, ss.str());
  std::cout << ss.str();
  return 0;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--net", c.net, "network file");
  app->add_option("--evidence", c.evidence, "evidence, case or findings file");
  app->add_option("--query-vars", c.query_vars, "query variables (comma separated)");
  app->add_option("--out", c.out, "output file");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--format", c.format, "report format")->check(CLI::IsMember({"text", "tsv"}));
  app->add_flag("--verify", c.verify, "cross-check results");
  app->add_option("--node-budget", c.node_budget, "d-DNNF edge budget");
  app->add_flag("--no-refinements", c.no_refinements, "disable encoding refinements");
  app->add_flag("--no-learned-evidence", c.no_learned, "disable learned-evidence repruning");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian network compilation with evidence"};
  app.require_subcommand(1);
  Common c;

  auto* compile = app.add_subcommand("compile", "compile a network with evidence into an arithmetic circuit");
  add_common(compile, c);
  std::string dimacs, nnf;
  compile->add_option("--dimacs", dimacs, "write the compiled CNF");
  compile->add_option("--nnf", nnf, "write the d-DNNF");

  auto* query = app.add_subcommand("query", "evaluate a compiled circuit");
  add_common(query, c);
  std::string ac_path;
  query->add_option("--ac", ac_path, "circuit file");

  auto* em = app.add_subcommand("em", "learn parameters by EM");
  add_common(em, c);
  int max_iters = 100;
  double tol = 1e-9;
  bool parallel = false, random_init = false;
  em->add_option("--max-iters", max_iters, "iteration cap");
  em->add_option("--tol", tol, "convergence tolerance");
  em->add_flag("--parallel", parallel, "parallel E-step");
  em->add_flag("--random-init", random_init, "seeded random initialization");

  auto* qs = app.add_subcommand("quickscore", "quickscore posteriors on a noisy-or network");
  add_common(qs, c);
  int bits = 0;
  qs->add_option("--precision-bits", bits, "fixed working precision (0 = adaptive)");

  auto* gen = app.add_subcommand("gen", "generate a random noisy-or problem");
  add_common(gen, c);
  int n = 30, m = 50, causes = 4, m_plus = 3;
  bool as_bn = false;
  gen->add_option("--diseases", n, "number of diseases");
  gen->add_option("--features", m, "number of features");
  gen->add_option("--causes", causes, "causes per feature");
  gen->add_option("--m-plus", m_plus, "positive findings");
  gen->add_flag("--bn", as_bn, "also write the decomposed network and evidence");

  auto* stats = app.add_subcommand("stats", "minfill cluster sizes before and after pruning");
  add_common(stats, c);

  auto* bench = app.add_subcommand("bench", "run a manifest or the noisy-or sweep");
  add_common(bench, c);
  std::string manifest;
  bool sweep = false;
  int bn = 120, bm = 400, bcauses = 11, seeds = 3;
  std::vector<int> sweep_m_plus;
  bench->add_option("--manifest", manifest, "manifest file");
  bench->add_flag("--sweep", sweep, "noisy-or m+ sweep");
  bench->add_option("--diseases", bn, "sweep diseases");
  bench->add_option("--features", bm, "sweep features");
  bench->add_option("--causes", bcauses, "sweep causes per feature");
  bench->add_option("--m-plus", sweep_m_plus, "sweep m+ values");
  bench->add_option("--seeds", seeds, "instances per m+");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*compile) return cmd_compile(c, dimacs, nnf);
    if (*query) return cmd_query(c, ac_path);
    if (*em) return cmd_em(c, max_iters, tol, parallel, random_init);
    if (*qs) return cmd_quickscore(c, bits);
    if (*gen) return cmd_gen(c, n, m, causes, m_plus, as_bn);
    if (*stats) return cmd_stats(c);
    if (*bench) return cmd_bench(c, manifest, sweep, bn, bm, bcauses, sweep_m_plus, seeds);
  } catch (const Error& e) {
    std::cerr << "error " << to_string(e.kind()) << ": " << e.what() << '\n';
    return e.kind() == ErrorKind::usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
