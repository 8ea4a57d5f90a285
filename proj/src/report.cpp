#include "bnac/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "bnac/io.hpp"

namespace bnac {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

double network_cluster(const BayesianNetwork& net) {
  if (net.size() == 0) return 0.0;
  return minfill_order(InteractionGraph::from_network(net)).max_cluster;
}

std::string join_path(const std::string& dir, const std::string& file) {
  if (file.empty() || file[0] == '/' || dir.empty()) return file;
  return dir + "/" + file;
}

}  // namespace

ClusterStats cluster_stats(std::shared_ptr<const BayesianNetwork> net, const Evidence& ev,
                           const PipelineOptions& opts) {
  check_evidence(*net, ev);
  ClusterStats s;
  s.original = network_cluster(*net);
  s.variables_original = net->size();
  std::set<VarId> query;
  if (opts.query_vars) query = *opts.query_vars;
  else
    for (VarId v = 0; v < net->size(); ++v) query.insert(v);
  PruneResult pr = classical_prune(net, ev, query);
  s.pruned = network_cluster(pr.network.to_network());
  s.variables_pruned = pr.network.active_count();
  PipelineOptions o = opts;
  o.compile_circuit = false;
  CompiledModel m = compile_network(net, ev, o);
  s.inconsistent = m.report.inconsistent;
  s.learned_evidence = m.report.learned;
  s.learned = network_cluster(m.pruned.to_network());
  s.variables_learned = m.pruned.active_count();
  return s;
}

double time_online_query(const ArithmeticCircuit& ac, double min_seconds) {
  const auto start = Clock::now();
  int reps = 0;
  double elapsed = 0.0;
  volatile double sink = 0.0;
  do {
    EvalResult r = differentiate(ac, Evidence{});
    if (r.value > 0.0)
      for (const auto& m : variable_marginals(ac, r))
        if (!m.empty()) sink = sink + m[0];
    ++reps;
    elapsed = since(start);
  } while (elapsed < min_seconds);
  return elapsed / reps;
}

RunReport run_network(const std::string& name, std::shared_ptr<const BayesianNetwork> net,
                      const Evidence& ev, const PipelineOptions& opts, double min_online) {
  RunReport r;
  r.name = name;
  CompiledModel m = compile_network(net, ev, opts);
  r.offline_seconds = m.report.offline_seconds;
  r.max_cluster = network_cluster(m.pruned.to_network());
  r.ac_edges = m.circuit.edge_count();
  r.inconsistent = m.report.inconsistent;
  r.learned_assignments = m.report.learned.assignments.size();
  r.pr_evidence = evaluate(m.circuit, Evidence{});
  r.online_seconds = time_online_query(m.circuit, min_online);
  return r;
}

RunReport run_noisy_or(const std::string& name, const NoisyOrNetwork& nor, const Findings& f,
                       const NoisyOrRunOptions& opts) {
  RunReport r;
  r.name = name;
  r.m_plus = static_cast<int>(f.positive.size());
  DecomposedIds ids;
  auto net = std::make_shared<const BayesianNetwork>(decompose(nor, &ids));
  const Evidence ev = findings_evidence(ids, f);
  PipelineOptions po = opts.pipeline;
  po.query_vars = std::set<VarId>(ids.disease.begin(), ids.disease.end());
  CompiledModel m = compile_network(net, ev, po);
  r.offline_seconds = m.report.offline_seconds;
  r.max_cluster = m.report.compile.max_cluster;
  r.ac_edges = m.circuit.edge_count();
  r.inconsistent = m.report.inconsistent;
  r.learned_assignments = m.report.learned.assignments.size();
  EvalResult er = differentiate(m.circuit, Evidence{});
  r.pr_evidence = er.value;
  r.online_seconds = time_online_query(m.circuit, opts.min_seconds);
  if (opts.quickscore) {
    QuickscoreOptions qo;
    qo.precision_bits = opts.quickscore_bits;
    QuickscoreResult qs;
    const auto start = Clock::now();
    int reps = 0;
    do {
      qs = quickscore(nor, f, qo);
      ++reps;
    } while (since(start) < opts.min_seconds);
    r.quickscore_seconds = since(start) / reps;
    r.quickscore_bits = qs.precision_bits;
    if (opts.verify) {
      auto marg = variable_marginals(m.circuit, er);
      double worst = 0.0;
      for (int i = 0; i < nor.diseases(); ++i)
        worst = std::max(worst, std::abs(marg[ids.disease[i]][1] - qs.posterior[i]));
      r.max_posterior_diff = worst;
    }
  }
  return r;
}

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  std::vector<ManifestEntry> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    ManifestEntry e;
    if (!(ls >> e.kind)) continue;
    auto fail = [&](const std::string& msg) {
      throw Error(ErrorKind::parse, "line " + std::to_string(ln) + ", column 1: " + msg);
    };
    if (e.kind == "bn") {
      if (!(ls >> e.name >> e.network)) fail("bn needs a name and a network file");
      ls >> e.evidence;
    } else if (e.kind == "noisyor") {
      if (!(ls >> e.name >> e.n >> e.m >> e.causes >> e.m_plus >> e.seed))
        fail("noisyor needs name n m causes m+ seed");
    } else {
      fail("unknown entry '" + e.kind + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing '" + extra + "'");
    out.push_back(e);
  }
  return out;
}

std::vector<RunReport> run_manifest(const std::vector<ManifestEntry>& entries, const std::string& base_dir,
                                    const NoisyOrRunOptions& opts) {
  std::vector<RunReport> out;
  for (const auto& e : entries) {
    if (e.kind == "bn") {
      auto net = std::make_shared<const BayesianNetwork>(parse_network(read_file(join_path(base_dir, e.network))));
      Evidence ev;
      if (!e.evidence.empty()) ev = parse_evidence(read_file(join_path(base_dir, e.evidence)), *net);
      out.push_back(run_network(e.name, net, ev, opts.pipeline, opts.min_seconds));
    } else {
      GeneratedProblem g = generate(e.n, e.m, e.causes, e.m_plus, e.seed);
      RunReport r = run_noisy_or(e.name, g.network, g.findings, opts);
      r.seed = e.seed;
      out.push_back(r);
    }
  }
  return out;
}

SweepSummary noisy_or_sweep(const SweepOptions& opts) {
  const auto start = Clock::now();
  SweepSummary s;
  std::map<int, std::pair<double, double>> totals;  // m+ -> (quickscore, online)
  for (int mp : opts.m_plus) {
    for (std::uint64_t seed : opts.seeds) {
      GeneratedProblem g = generate(opts.n, opts.m, opts.causes, mp, seed);
      NoisyOrRunOptions ro;
      ro.verify = mp <= opts.verify_up_to;
      ro.quickscore_bits = opts.quickscore_bits;
      ro.min_seconds = opts.min_seconds;
      ro.pipeline = opts.pipeline;
      RunReport r = run_noisy_or("nor-" + std::to_string(mp) + "-" + std::to_string(seed), g.network,
                                 g.findings, ro);
      r.seed = seed;
      totals[mp].first += r.quickscore_seconds;
      totals[mp].second += r.online_seconds;
      if (ro.verify) s.max_posterior_diff = std::max(s.max_posterior_diff, r.max_posterior_diff);
      s.rows.push_back(r);
    }
  }
  const double k = static_cast<double>(opts.seeds.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double lo = INFINITY, hi = 0.0;
  for (const auto& [mp, t] : totals) {
    const double x = mp, y = std::log2(t.first / k);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    lo = std::min(lo, t.second / k);
    hi = std::max(hi, t.second / k);
  }
  const double cnt = static_cast<double>(totals.size());
  const double denom = cnt * sxx - sx * sx;
  s.quickscore_growth = denom > 0 ? std::exp2((cnt * sxy - sx * sy) / denom) : 0.0;
  s.online_ratio = lo > 0 ? hi / lo : 0.0;
  s.seconds = since(start);
  return s;
}

void write_reports(const std::vector<RunReport>& rows, ReportFormat format, std::ostream& out) {
  const bool tsv = format == ReportFormat::tsv;
  char buf[512];
  if (tsv) {
    out << "name\tmax_cluster\toffline_sec\tac_edges\tonline_sec\tpr_e\tlearned\tinconsistent\tm_plus\tseed"
           "\tquickscore_sec\tquickscore_bits\tmax_diff\n";
  } else {
    std::snprintf(buf, sizeof buf, "%-20s %9s %12s %12s %12s %12s %7s %6s %12s %12s\n", "name", "max_clust",
                  "offline_sec", "ac_edges", "online_sec", "pr_e", "learned", "m+", "qs_sec", "max_diff");
    out << buf;
  }
  for (const auto& r : rows) {
    if (tsv) {
      std::snprintf(buf, sizeof buf, "%s\t%.2f\t%.6f\t%zu\t%.6g\t%.17g\t%zu\t%d\t%d\t%llu\t%.6g\t%d\t%.3g\n",
                    r.name.c_str(), r.max_cluster, r.offline_seconds, r.ac_edges, r.online_seconds,
                    r.pr_evidence, r.learned_assignments, r.inconsistent ? 1 : 0, r.m_plus,
                    static_cast<unsigned long long>(r.seed), r.quickscore_seconds, r.quickscore_bits,
                    r.max_posterior_diff);
    } else {
      std::snprintf(buf, sizeof buf, "%-20s %9.1f %12.4f %12zu %12.3g %12.6g %7zu %6d %12.3g %12.3g\n",
                    r.name.c_str(), r.max_cluster, r.offline_seconds, r.ac_edges, r.online_seconds,
                    r.pr_evidence, r.learned_assignments, r.m_plus, r.quickscore_seconds,
                    r.max_posterior_diff);
    }
    out << buf;
  }
}

}  // namespace bnac
