#include "bnac/noisyor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <boost/multiprecision/mpfr.hpp>

namespace bnac {

using boost::multiprecision::mpfr_float;

namespace {

bool is_prob(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

std::vector<std::string> binary_states() { return {"n", "y"}; }

}  // namespace

void NoisyOrNetwork::validate() const {
  if (features < 0) throw Error(ErrorKind::invalid_model, "negative feature count");
  for (std::size_t i = 0; i < prior.size(); ++i)
    if (!is_prob(prior[i]))
      throw Error(ErrorKind::invalid_model, "prior of disease " + std::to_string(i) + " not in [0,1]");
  if (!leak.empty() && leak.size() != static_cast<std::size_t>(features))
    throw Error(ErrorKind::invalid_model, "leak list must cover every feature");
  for (std::size_t j = 0; j < leak.size(); ++j)
    if (!is_prob(leak[j]))
      throw Error(ErrorKind::invalid_model, "leak of feature " + std::to_string(j) + " not in [0,1]");
  std::set<std::pair<int, int>> seen;
  for (const auto& l : links) {
    if (l.disease < 0 || l.disease >= diseases() || l.feature < 0 || l.feature >= features)
      throw Error(ErrorKind::invalid_model, "link endpoint out of range");
    if (!is_prob(l.p)) throw Error(ErrorKind::invalid_model, "link probability not in [0,1]");
    if (!seen.insert({l.disease, l.feature}).second)
      throw Error(ErrorKind::invalid_model, "duplicate link " + std::to_string(l.disease) + " " +
                                                std::to_string(l.feature));
  }
}

std::vector<std::vector<int>> NoisyOrNetwork::links_by_feature() const {
  std::vector<std::vector<int>> out(features);
  for (std::size_t k = 0; k < links.size(); ++k) out[links[k].feature].push_back(static_cast<int>(k));
  return out;
}

void Findings::validate(int features) const {
  std::set<int> seen;
  for (int j : positive) {
    if (j < 0 || j >= features) throw Error(ErrorKind::invalid_model, "finding out of range");
    if (!seen.insert(j).second) throw Error(ErrorKind::invalid_model, "repeated finding " + std::to_string(j));
  }
  for (int j : negative) {
    if (j < 0 || j >= features) throw Error(ErrorKind::invalid_model, "finding out of range");
    if (!seen.insert(j).second)
      throw Error(ErrorKind::invalid_model, "feature " + std::to_string(j) + " is both positive and negative");
  }
}

namespace {

// Deterministic OR table over `k` binary parents.
std::vector<double> or_table(std::size_t k) {
  const std::size_t rows = std::size_t{1} << k;
  std::vector<double> t(rows * 2);
  for (std::size_t r = 0; r < rows; ++r) {
    t[2 * r] = r == 0 ? 1.0 : 0.0;
    t[2 * r + 1] = r == 0 ? 0.0 : 1.0;
  }
  return t;
}

}  // namespace

BayesianNetwork decompose(const NoisyOrNetwork& nor, DecomposedIds* ids) {
  nor.validate();
  BayesianNetwork net;
  DecomposedIds local;
  DecomposedIds& out = ids ? *ids : local;
  out = {};
  for (int i = 0; i < nor.diseases(); ++i) {
    VarId d = net.add_variable("d" + std::to_string(i), binary_states());
    net.set_cpt(d, {}, {1.0 - nor.prior[i], nor.prior[i]});
    out.disease.push_back(d);
  }
  for (const auto& l : nor.links) {
    const std::string tag = std::to_string(l.disease) + "_" + std::to_string(l.feature);
    VarId c = net.add_variable("c" + tag, binary_states());
    net.set_cpt(c, {}, {1.0 - l.p, l.p});
    VarId a = net.add_variable("a" + tag, binary_states());
    net.set_cpt(a, {out.disease[l.disease], c}, {1, 0, 1, 0, 1, 0, 0, 1});
    out.cause.push_back(c);
    out.active.push_back(a);
  }
  const auto by_feature = nor.links_by_feature();
  for (int j = 0; j < nor.features; ++j) {
    std::vector<VarId> parents;
    for (int k : by_feature[j]) parents.push_back(out.active[k]);
    VarId leak = -1;
    if (!nor.leak.empty()) {
      leak = net.add_variable("l" + std::to_string(j), binary_states());
      net.set_cpt(leak, {}, {1.0 - nor.leak[j], nor.leak[j]});
      parents.push_back(leak);
    }
    out.leak.push_back(leak);
    VarId f = net.add_variable("f" + std::to_string(j), binary_states());
    net.set_cpt(f, parents, or_table(parents.size()));
    out.feature.push_back(f);
  }
  return net;
}

BayesianNetwork direct_network(const NoisyOrNetwork& nor) {
  nor.validate();
  BayesianNetwork net;
  for (int i = 0; i < nor.diseases(); ++i) {
    VarId d = net.add_variable("d" + std::to_string(i), binary_states());
    net.set_cpt(d, {}, {1.0 - nor.prior[i], nor.prior[i]});
  }
  const auto by_feature = nor.links_by_feature();
  for (int j = 0; j < nor.features; ++j) {
    std::vector<VarId> parents;
    std::vector<double> q;
    for (int k : by_feature[j]) {
      parents.push_back(nor.links[k].disease);
      q.push_back(1.0 - nor.links[k].p);
    }
    const double leak_off = nor.leak.empty() ? 1.0 : 1.0 - nor.leak[j];
    const std::size_t rows = std::size_t{1} << parents.size();
    std::vector<double> table(rows * 2);
    for (std::size_t r = 0; r < rows; ++r) {
      double off = leak_off;
      for (std::size_t b = 0; b < parents.size(); ++b)
        if (r >> (parents.size() - 1 - b) & 1) off *= q[b];
      table[2 * r] = off;
      table[2 * r + 1] = 1.0 - off;
    }
    VarId f = net.add_variable("f" + std::to_string(j), binary_states());
    net.set_cpt(f, parents, std::move(table));
  }
  return net;
}

Evidence findings_evidence(const DecomposedIds& ids, const Findings& f) {
  Evidence ev;
  for (int j : f.positive) ev.assignments[ids.feature.at(j)] = 1;
  for (int j : f.negative) ev.assignments[ids.feature.at(j)] = 0;
  return ev;
}

namespace {

template <class T>
struct SubsetSums {
  T total = 0;
  std::vector<T> present;
  // Sums of absolute terms, for the cancellation estimate.
  T total_abs = 0;
  std::vector<T> present_abs;
};

// One pass over the power set of the positive findings.
template <class T>
SubsetSums<T> subset_pass(const NoisyOrNetwork& nor, const Findings& f, const std::vector<double>& q) {
  const int n = nor.diseases();
  const int mp = static_cast<int>(f.positive.size());
  std::vector<int> off;
  off.reserve(f.negative.size() + mp);
  SubsetSums<T> r;
  r.present.assign(n, T(0));
  r.present_abs.assign(n, T(0));
  std::vector<T> factor(n), on(n), prefix(n + 1), suffix(n + 1);
  std::vector<T> prior(n), absent(n);
  for (int i = 0; i < n; ++i) {
    prior[i] = T(nor.prior[i]);
    absent[i] = T(1) - prior[i];
  }
  const std::uint64_t subsets = std::uint64_t{1} << mp;
  for (std::uint64_t s = 0; s < subsets; ++s) {
    off.assign(f.negative.begin(), f.negative.end());
    int size = 0;
    for (int b = 0; b < mp; ++b)
      if (s >> b & 1) {
        off.push_back(f.positive[b]);
        ++size;
      }
    T leak = 1;
    if (!nor.leak.empty())
      for (int j : off) leak *= T(1) - T(nor.leak[j]);
    for (int i = 0; i < n; ++i) {
      T prod = prior[i];
      for (int j : off) {
        const double x = q[static_cast<std::size_t>(j) * n + i];
        if (x != 1.0) prod *= x;
      }
      on[i] = prod;
      factor[i] = absent[i] + on[i];
    }
    prefix[0] = leak;
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * factor[i];
    suffix[n] = 1;
    for (int i = n; i-- > 0;) suffix[i] = suffix[i + 1] * factor[i];
    const bool odd = size % 2;
    if (odd)
      r.total -= prefix[n];
    else
      r.total += prefix[n];
    r.total_abs += prefix[n];
    for (int i = 0; i < n; ++i) {
      T term = on[i] * prefix[i] * suffix[i + 1];
      r.present_abs[i] += term;
      if (odd)
        r.present[i] -= term;
      else
        r.present[i] += term;
    }
  }
  return r;
}

// Worst absolute error bound on a posterior, in units of the working epsilon.
template <class T>
double cancellation(const SubsetSums<T>& r) {
  if (!(r.total > 0)) return std::numeric_limits<double>::infinity();
  T worst = r.total_abs;
  for (const T& x : r.present_abs)
    if (x > worst) worst = x;
  return 2.0 * static_cast<double>(worst / r.total);
}

template <class T>
QuickscoreResult finish(const SubsetSums<T>& r, std::uint64_t subsets, int bits, double err) {
  QuickscoreResult out;
  out.subsets = subsets;
  out.precision_bits = bits;
  out.error_bound = err;
  out.evidence_probability = static_cast<long double>(r.total);
  out.posterior.resize(r.present.size());
  for (std::size_t i = 0; i < r.present.size(); ++i)
    out.posterior[i] = static_cast<double>(r.present[i] / r.total);
  return out;
}

// Pr(findings) > 0 iff the assignment turning on every disease that may be
// present has positive probability: extra diseases never hurt positive
// findings, and only certain links can rule out a negative one.
bool findings_possible(const NoisyOrNetwork& nor, const Findings& f) {
  const int n = nor.diseases();
  std::vector<char> negative(nor.features, 0), on(n, 0);
  for (int j : f.negative) negative[j] = 1;
  for (int i = 0; i < n; ++i) on[i] = nor.prior[i] > 0.0;
  for (const auto& l : nor.links)
    if (negative[l.feature] && l.p == 1.0) on[l.disease] = 0;
  for (int i = 0; i < n; ++i)
    if (!on[i] && nor.prior[i] == 1.0) return false;
  for (int j : f.negative)
    if (!nor.leak.empty() && nor.leak[j] == 1.0) return false;
  std::vector<char> lit(nor.features, 0);
  for (const auto& l : nor.links)
    if (on[l.disease] && l.p > 0.0) lit[l.feature] = 1;
  for (int j : f.positive)
    if (!lit[j] && (nor.leak.empty() || nor.leak[j] == 0.0)) return false;
  return true;
}

}  // namespace

QuickscoreResult quickscore(const NoisyOrNetwork& nor, const Findings& f, const QuickscoreOptions& opts) {
  nor.validate();
  f.validate(nor.features);
  const int n = nor.diseases();
  const int mp = static_cast<int>(f.positive.size());
  if (mp > opts.max_positive)
    throw Error(ErrorKind::bound_exceeded, std::to_string(mp) + " positive findings exceed the cap of " +
                                               std::to_string(opts.max_positive));
  if (!findings_possible(nor, f)) throw Error(ErrorKind::inconsistent_evidence, "findings have probability zero");
  // q[j * n + i] = 1 - p_ij, 1 without a link.
  std::vector<double> q(static_cast<std::size_t>(nor.features) * n, 1.0);
  for (const auto& l : nor.links) q[static_cast<std::size_t>(l.feature) * n + l.disease] = 1.0 - l.p;
  const std::uint64_t subsets = std::uint64_t{1} << mp;
  // Each term carries a relative rounding error of about (n + m) epsilon.
  const double ops = static_cast<double>(n + nor.features + 2);

  int bits = opts.precision_bits;
  if (bits == 0) {
    auto r = subset_pass<long double>(nor, f, q);
    const double err = cancellation(r) * ops * std::ldexp(1.0, -std::numeric_limits<long double>::digits);
    if (err <= opts.tolerance) return finish(r, subsets, std::numeric_limits<long double>::digits, err);
    bits = 128;
    if (std::isfinite(err)) bits = std::max(bits, 64 + static_cast<int>(std::ceil(std::log2(err / opts.tolerance))) + 32);
  }
  for (;;) {
    mpfr_float::default_precision(static_cast<unsigned>(std::ceil(bits * 0.30103)) + 1);
    auto r = subset_pass<mpfr_float>(nor, f, q);
    const double cond = cancellation(r);
    const double err = cond * ops * std::ldexp(1.0, -bits);
    if (opts.precision_bits > 0 || err <= opts.tolerance) {
      if (!(r.total > 0)) throw Error(ErrorKind::inconsistent_evidence, "findings have probability zero");
      return finish(r, subsets, bits, err);
    }
    if (bits >= opts.max_precision_bits)
      throw Error(ErrorKind::bound_exceeded, "quickscore needs more than " + std::to_string(opts.max_precision_bits) +
                                                 " bits of precision");
    bits = std::min(opts.max_precision_bits,
                    std::isfinite(cond) ? std::max(2 * bits, static_cast<int>(std::log2(cond * ops / opts.tolerance)) + 32)
                                        : 2 * bits);
  }
}

GeneratedProblem generate(int n, int m, int causes_per_feature, int m_plus, std::uint64_t seed) {
  if (n < 0 || m < 0 || causes_per_feature < 0 || causes_per_feature > n || m_plus < 0 || m_plus > m)
    throw Error(ErrorKind::usage, "generator parameters out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto open_unit = [&] {
    double x;
    do x = unit(rng);
    while (x <= 0.0);
    return x;
  };
  GeneratedProblem g;
  NoisyOrNetwork& nor = g.network;
  nor.features = m;
  for (int i = 0; i < n; ++i) nor.prior.push_back(open_unit());
  std::vector<int> pool(n);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int k = 0; k < causes_per_feature; ++k) {
      std::uniform_int_distribution<int> pick(k, n - 1);
      std::swap(pool[k], pool[pick(rng)]);
    }
    std::vector<int> causes(pool.begin(), pool.begin() + causes_per_feature);
    std::sort(causes.begin(), causes.end());
    for (int i : causes) nor.links.push_back({i, j, open_unit()});
  }
  std::vector<int> feats(m);
  for (int j = 0; j < m; ++j) feats[j] = j;
  for (int k = 0; k < m_plus; ++k) {
    std::uniform_int_distribution<int> pick(k, m - 1);
    std::swap(feats[k], feats[pick(rng)]);
  }
  std::vector<bool> pos(m, false);
  for (int k = 0; k < m_plus; ++k) pos[feats[k]] = true;
  for (int j = 0; j < m; ++j) (pos[j] ? g.findings.positive : g.findings.negative).push_back(j);
  return g;
}

BayesianNetwork csi_transform(const BayesianNetwork& net, VarId child,
                              const std::vector<std::vector<std::size_t>>& blocks) {
  const std::size_t rows = net.row_count(child);
  const int card = net.card(child);
  std::vector<int> block_of(rows, -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw Error(ErrorKind::invalid_model, "empty block in partition");
    for (std::size_t r : blocks[b]) {
      if (r >= rows) throw Error(ErrorKind::invalid_model, "row " + std::to_string(r) + " out of range");
      if (block_of[r] != -1) throw Error(ErrorKind::invalid_model, "row " + std::to_string(r) + " in two blocks");
      block_of[r] = static_cast<int>(b);
    }
  }
  for (std::size_t r = 0; r < rows; ++r)
    if (block_of[r] == -1) throw Error(ErrorKind::invalid_model, "row " + std::to_string(r) + " not covered");
  for (const auto& block : blocks)
    for (std::size_t r : block)
      for (int s = 0; s < card; ++s)
        if (std::abs(net.theta(child, r, s) - net.theta(child, block[0], s)) > 1e-12)
          throw Error(ErrorKind::invalid_model, "block mixes rows with different distributions");

  BayesianNetwork out;
  for (const auto& v : net.variables()) out.add_variable(v.name, v.states);
  std::string name = "S";
  while (net.find(name)) name += "_";
  std::vector<std::string> states;
  for (std::size_t b = 0; b < blocks.size(); ++b) states.push_back("s" + std::to_string(b + 1));
  const VarId S = out.add_variable(name, states);
  const Cpt& old = net.cpt(child);
  for (const auto& c : net.cpts())
    if (c.child != child) out.set_cpt(c.child, c.parents, c.table);
  std::vector<double> st(rows * blocks.size(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) st[r * blocks.size() + block_of[r]] = 1.0;
  out.set_cpt(S, old.parents, std::move(st));
  std::vector<double> ct(blocks.size() * card);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (int s = 0; s < card; ++s) ct[b * card + s] = net.theta(child, blocks[b][0], s);
  out.set_cpt(child, {S}, std::move(ct));
  for (VarId v : net.learnable()) out.set_learnable(v);
  return out;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[noreturn]] void bad_line(int ln, const std::string& msg) {
  throw Error(ErrorKind::parse, "line " + std::to_string(ln) + ", column 1: " + msg);
}

template <class Fn>
void for_each_line(std::string_view text, Fn fn) {
  std::istringstream in{std::string(text)};
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    fn(ln, head, ls);
  }
}

}  // namespace

void write_noisy_or(const NoisyOrNetwork& nor, std::ostream& out) {
  out << "diseases " << nor.diseases() << '\n' << "features " << nor.features << '\n';
  for (int i = 0; i < nor.diseases(); ++i) out << "prior " << i << ' ' << fmt(nor.prior[i]) << '\n';
  for (const auto& l : nor.links) out << "link " << l.disease << ' ' << l.feature << ' ' << fmt(l.p) << '\n';
  for (std::size_t j = 0; j < nor.leak.size(); ++j) out << "leak " << j << ' ' << fmt(nor.leak[j]) << '\n';
}

NoisyOrNetwork parse_noisy_or(std::string_view text) {
  NoisyOrNetwork nor;
  int n = -1;
  std::vector<bool> has_prior;
  std::map<int, double> leaks;
  for_each_line(text, [&](int ln, const std::string& head, std::istringstream& ls) {
    auto need = [&](auto& x) {
      if (!(ls >> x)) bad_line(ln, "malformed " + head + " line");
    };
    auto done = [&] {
      std::string extra;
      if (ls >> extra) bad_line(ln, "trailing '" + extra + "'");
    };
    if (head == "diseases") {
      need(n);
      done();
      if (n < 0) bad_line(ln, "negative disease count");
      nor.prior.assign(n, 0.0);
      has_prior.assign(n, false);
    } else if (head == "features") {
      need(nor.features);
      done();
      if (nor.features < 0) bad_line(ln, "negative feature count");
    } else if (head == "prior") {
      int i;
      double p;
      need(i);
      need(p);
      done();
      if (i < 0 || i >= n) bad_line(ln, "disease out of range");
      nor.prior[i] = p;
      has_prior[i] = true;
    } else if (head == "link") {
      NoisyOrLink l;
      need(l.disease);
      need(l.feature);
      need(l.p);
      done();
      nor.links.push_back(l);
    } else if (head == "leak") {
      int j;
      double p;
      need(j);
      need(p);
      done();
      leaks[j] = p;
    } else {
      bad_line(ln, "unexpected '" + head + "'");
    }
  });
  if (n < 0) bad_line(1, "missing diseases line");
  for (int i = 0; i < n; ++i)
    if (!has_prior[i]) throw Error(ErrorKind::parse, "no prior for disease " + std::to_string(i));
  if (!leaks.empty()) {
    nor.leak.assign(nor.features, 0.0);
    for (auto [j, p] : leaks) {
      if (j < 0 || j >= nor.features) throw Error(ErrorKind::parse, "leak feature out of range");
      nor.leak[j] = p;
    }
  }
  nor.validate();
  return nor;
}

void write_findings(const Findings& f, std::ostream& out) {
  for (int j : f.positive) out << "+ " << j << '\n';
  for (int j : f.negative) out << "- " << j << '\n';
}

Findings parse_findings(std::string_view text) {
  Findings f;
  for_each_line(text, [&](int ln, const std::string& head, std::istringstream& ls) {
    int j;
    if (!(ls >> j)) bad_line(ln, "expected a feature id");
    if (head == "+")
      f.positive.push_back(j);
    else if (head == "-")
      f.negative.push_back(j);
    else
      bad_line(ln, "expected '+' or '-'");
  });
  return f;
}

}  // namespace bnac
