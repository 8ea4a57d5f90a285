#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <sstream>

#include "bnac/report.hpp"

using namespace bnac;
using namespace bnac::testing;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out(1);
  for (char c : s) {
    if (c == sep) out.emplace_back();
    else out.back() += c;
  }
  return out;
}

}  // namespace

TEST_CASE("manifest lines") {
  auto es = parse_manifest(
      "# header\n"
      "bn fig fig1.net\n"
      "\n"
      "bn pheno phenotype.net pheno.ev  # trailing comment\n"
      "noisyor small 10 20 3 2 5\n");
  REQUIRE(es.size() == 3);
  CHECK(es[0].kind == "bn");
  CHECK(es[0].network == "fig1.net");
  CHECK(es[0].evidence.empty());
  CHECK(es[1].evidence == "pheno.ev");
  CHECK(es[2].kind == "noisyor");
  CHECK(es[2].n == 10);
  CHECK(es[2].m == 20);
  CHECK(es[2].causes == 3);
  CHECK(es[2].m_plus == 2);
  CHECK(es[2].seed == 5);
}

TEST_CASE("manifest errors name the line") {
  for (auto [text, line] : {std::pair{"bn a x.net\nfoo b\n", "line 2"}, std::pair{"noisyor a 1 2\n", "line 1"},
                            std::pair{"\nbn a x.net y.ev z\n", "line 2"}, std::pair{"bn\n", "line 1"}}) {
    try {
      parse_manifest(text);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
      CHECK(std::string(e.what()).find(line) != std::string::npos);
    }
  }
}

TEST_CASE("report formats") {
  RunReport a;
  a.name = "first";
  a.ac_edges = 42;
  a.pr_evidence = 0.25;
  RunReport b = a;
  b.name = "second";
  b.m_plus = 3;
  std::ostringstream tsv, text;
  write_reports({a, b}, ReportFormat::tsv, tsv);
  write_reports({a, b}, ReportFormat::text, text);
  auto lines = split(tsv.str(), '\n');
  REQUIRE(lines.size() == 4);
  CHECK(lines[3].empty());
  const auto header = split(lines[0], '\t');
  for (int i = 1; i <= 2; ++i) {
    auto cols = split(lines[i], '\t');
    REQUIRE(cols.size() == header.size());
    CHECK(cols[3] == "42");
    CHECK(std::stod(cols[5]) == 0.25);
  }
  CHECK(split(lines[2], '\t')[0] == "second");
  CHECK(split(lines[2], '\t')[8] == "3");
  CHECK(split(text.str(), '\n').size() == 4);
}

TEST_CASE("cluster sizes shrink under learned evidence") {
  auto net = load_fixture("phenotype.net");
  Evidence ev;
  ev.assignments[2] = 0;
  ClusterStats s = cluster_stats(net, ev);
  CHECK(s.variables_original == 3);
  CHECK(s.original == doctest::Approx(2.0 + std::log2(3.0)));
  CHECK(s.learned_evidence.assignments == std::map<VarId, StateId>{{0, 0}, {1, 0}});
  CHECK(s.learned <= s.pruned);
  CHECK(s.pruned <= s.original);
  CHECK(s.variables_learned <= s.variables_pruned);
  CHECK(!s.inconsistent);
}

TEST_CASE("manifest runs") {
  auto es = parse_manifest("bn fig fig1.net\nnoisyor nor 8 12 3 2 4\n");
  NoisyOrRunOptions o;
  o.verify = true;
  o.min_seconds = 0.0;
  auto rows = run_manifest(es, BNAC_TEST_DATA, o);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].name == "fig");
  CHECK(rows[0].pr_evidence == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rows[0].ac_edges > 0);
  CHECK(rows[1].m_plus == 2);
  CHECK(rows[1].seed == 4);
  CHECK(rows[1].max_posterior_diff >= 0.0);
  CHECK(rows[1].max_posterior_diff <= 1e-10);
  CHECK(rows[1].quickscore_bits > 0);
  CHECK_THROWS_AS(run_manifest(parse_manifest("bn gone missing.net\n"), BNAC_TEST_DATA, o), Error);
}
