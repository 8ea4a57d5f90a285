#include "bnac/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace bnac {

namespace {

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size() || line[i] == '#') break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != '#')
      ++j;
    out.push_back({std::string(line.substr(i, j - i)), static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

[[noreturn]] void parse_error(int line, int col, const std::string& msg) {
  throw Error(ErrorKind::parse,
              "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
}

double parse_prob(const Token& t, int line) {
  char* end = nullptr;
  double x = std::strtod(t.text.c_str(), &end);
  if (end == t.text.c_str() || *end != '\0') parse_error(line, t.column, "expected a number, got '" + t.text + "'");
  return x;
}

struct PendingCpt {
  VarId child = 0;
  std::vector<VarId> parents;
  std::vector<double> table;
  std::vector<bool> seen;
  std::size_t rows = 0;
  int line = 0;
};

}  // namespace

BayesianNetwork parse_network(std::string_view text) {
  BayesianNetwork net;
  std::vector<PendingCpt> cpts;
  std::vector<std::pair<std::string, int>> learn;
  auto lines = split_lines(text);
  PendingCpt* current = nullptr;
  bool any = false;

  auto lookup = [&](const Token& t, int line) {
    auto v = net.find(t.text);
    if (!v) parse_error(line, t.column, "unknown variable '" + t.text + "'");
    return *v;
  };
  auto state_of = [&](VarId v, const Token& t, int line) {
    auto s = net.variable(v).state_index(t.text);
    if (!s) parse_error(line, t.column, "unknown state '" + t.text + "' of " + net.variable(v).name);
    return *s;
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i) + 1;
    auto toks = tokenize(lines[i]);
    if (toks.empty()) continue;
    any = true;
    const std::string& head = toks[0].text;
    if (head == "var") {
      current = nullptr;
      if (toks.size() < 3) parse_error(ln, toks[0].column, "var needs a name and at least one state");
      if (net.find(toks[1].text)) parse_error(ln, toks[1].column, "duplicate variable '" + toks[1].text + "'");
      std::vector<std::string> states;
      for (std::size_t k = 2; k < toks.size(); ++k) {
        for (const auto& s : states)
          if (s == toks[k].text) parse_error(ln, toks[k].column, "duplicate state '" + s + "'");
        states.push_back(toks[k].text);
      }
      net.add_variable(toks[1].text, std::move(states));
    } else if (head == "cpt") {
      if (toks.size() < 2) parse_error(ln, toks[0].column, "cpt needs a child");
      PendingCpt p;
      p.child = lookup(toks[1], ln);
      p.line = ln;
      for (const auto& c : cpts)
        if (c.child == p.child) parse_error(ln, toks[1].column, "second cpt for " + toks[1].text);
      if (toks.size() > 2) {
        if (toks[2].text != "|") parse_error(ln, toks[2].column, "expected '|'");
        for (std::size_t k = 3; k < toks.size(); ++k) p.parents.push_back(lookup(toks[k], ln));
      }
      p.rows = 1;
      for (VarId q : p.parents) p.rows *= net.card(q);
      p.table.assign(p.rows * net.card(p.child), 0.0);
      p.seen.assign(p.rows, false);
      cpts.push_back(std::move(p));
      current = &cpts.back();
    } else if (head == "learn") {
      current = nullptr;
      if (toks.size() != 2) parse_error(ln, toks[0].column, "learn takes one variable");
      learn.emplace_back(toks[1].text, ln);
    } else {
      if (!current) parse_error(ln, toks[0].column, "unexpected '" + head + "'");
      std::size_t colon = 0;
      while (colon < toks.size() && toks[colon].text != ":") ++colon;
      if (colon == toks.size()) parse_error(ln, toks[0].column, "row needs ':'");
      if (colon != current->parents.size())
        parse_error(ln, toks[0].column,
                    "dimension mismatch in cpt " + net.variable(current->child).name + ": expected " +
                        std::to_string(current->parents.size()) + " parent states");
      std::size_t row = 0;
      for (std::size_t k = 0; k < colon; ++k)
        row = row * net.card(current->parents[k]) + state_of(current->parents[k], toks[k], ln);
      const int card = net.card(current->child);
      if (toks.size() - colon - 1 != static_cast<std::size_t>(card))
        parse_error(ln, toks[colon].column,
                    "dimension mismatch in cpt " + net.variable(current->child).name + ": expected " +
                        std::to_string(card) + " probabilities");
      if (current->seen[row]) parse_error(ln, toks[0].column, "duplicate row");
      current->seen[row] = true;
      for (int s = 0; s < card; ++s) current->table[row * card + s] = parse_prob(toks[colon + 1 + s], ln);
    }
  }
  if (!any) parse_error(1, 1, "empty network");
  for (const auto& p : cpts) {
    for (std::size_t r = 0; r < p.rows; ++r)
      if (!p.seen[r])
        parse_error(p.line, 1,
                    "dimension mismatch in cpt " + net.variable(p.child).name + ": " +
                        std::to_string(p.rows) + " rows expected");
    net.set_cpt(p.child, p.parents, p.table);
  }
  for (VarId v = 0; v < net.size(); ++v) {
    bool has = false;
    for (const auto& p : cpts) has = has || p.child == v;
    if (!has) parse_error(static_cast<int>(lines.size()), 1, "no cpt for " + net.variable(v).name);
  }
  for (const auto& [name, ln] : learn) {
    auto v = net.find(name);
    if (!v) parse_error(ln, 7, "unknown variable '" + name + "'");
    net.set_learnable(*v);
  }
  normalize_rows(net);
  check_valid(net);
  return net;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_network(const BayesianNetwork& net, std::ostream& out) {
  for (const auto& v : net.variables()) {
    out << "var " << v.name;
    for (const auto& s : v.states) out << ' ' << s;
    out << '\n';
  }
  for (const auto& v : net.variables()) {
    const Cpt& c = net.cpt(v.id);
    out << "cpt " << v.name;
    if (!c.parents.empty()) {
      out << " |";
      for (VarId p : c.parents) out << ' ' << net.variable(p).name;
    }
    out << '\n';
    for (std::size_t r = 0; r < net.row_count(v.id); ++r) {
      auto states = net.parent_states(v.id, r);
      for (std::size_t i = 0; i < states.size(); ++i)
        out << net.variable(c.parents[i]).states[states[i]] << ' ';
      out << ':';
      for (int s = 0; s < v.card(); ++s) out << ' ' << fmt(net.theta(v.id, r, s));
      out << '\n';
    }
  }
  for (VarId v : net.learnable()) out << "learn " << net.variable(v).name << '\n';
}

namespace {

Atom parse_atom(const BayesianNetwork& net, const Token& t, int ln) {
  auto eq = t.text.find('=');
  if (eq == std::string::npos) parse_error(ln, t.column, "expected <var>=<state>");
  std::string name = t.text.substr(0, eq), state = t.text.substr(eq + 1);
  auto v = net.find(name);
  if (!v) parse_error(ln, t.column, "unknown variable '" + name + "'");
  auto s = net.variable(*v).state_index(state);
  if (!s) parse_error(ln, t.column + static_cast<int>(eq) + 1, "unknown state '" + state + "' of " + name);
  return {*v, *s};
}

void evidence_line(const BayesianNetwork& net, const std::vector<Token>& toks, int ln, Evidence& ev) {
  if (toks[0].text == "or") {
    std::vector<Atom> clause;
    for (std::size_t k = 1; k < toks.size(); ++k) clause.push_back(parse_atom(net, toks[k], ln));
    if (clause.empty()) parse_error(ln, toks[0].column, "empty constraint");
    ev.constraints.push_back(std::move(clause));
    return;
  }
  // Accept "X = x", "X=x", "X= x" and "X =x".
  std::string joined;
  for (const auto& t : toks) joined += t.text;
  Token t{joined, toks[0].column};
  Atom a = parse_atom(net, t, ln);
  if (ev.assignments.count(a.var))
    parse_error(ln, toks[0].column, "duplicate assignment to " + net.variable(a.var).name);
  ev.assignments[a.var] = a.state;
}

}  // namespace

Evidence parse_evidence(std::string_view text, const BayesianNetwork& net) {
  Evidence ev;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto toks = tokenize(lines[i]);
    if (toks.empty()) continue;
    if (toks[0].text == "case")
      parse_error(static_cast<int>(i) + 1, toks[0].column, "case headers belong in case files");
    evidence_line(net, toks, static_cast<int>(i) + 1, ev);
  }
  return ev;
}

void write_evidence(const Evidence& ev, const BayesianNetwork& net, std::ostream& out) {
  for (const auto& [v, s] : ev.assignments)
    out << net.variable(v).name << " = " << net.variable(v).states[s] << '\n';
  for (const auto& c : ev.constraints) {
    out << "or";
    for (const Atom& a : c) out << ' ' << net.variable(a.var).name << '=' << net.variable(a.var).states[a.state];
    out << '\n';
  }
}

std::vector<NamedCase> parse_cases(std::string_view text, const BayesianNetwork& net) {
  std::vector<NamedCase> cases;
  auto lines = split_lines(text);
  bool open = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i) + 1;
    auto toks = tokenize(lines[i]);
    if (toks.empty()) continue;
    if (toks[0].text == "case") {
      if (toks.size() != 2) parse_error(ln, toks[0].column, "case takes one name");
      cases.push_back({toks[1].text, {}});
      open = true;
      continue;
    }
    if (!open) {
      cases.push_back({"default", {}});
      open = true;
    }
    evidence_line(net, toks, ln, cases.back().evidence);
  }
  return cases;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out << contents;
  if (!out) throw Error(ErrorKind::io, "write failed for " + path);
}

}  // namespace bnac
