#pragma once

// Line-oriented text formats.
//
// Network:
//   var <name> <state> <state> ...
//   cpt <child> | <parent> ...          ("cpt <child>" for roots)
//   <parent states ...> : <prob per child state ...>   one line per row
//   learn <name>
// Evidence:
//   <var> = <state>
//   or <var>=<state> <var>=<state> ...
//   case <name>                         starts a new case in multi-case files
// Lines starting with '#' are comments.

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bnac/model.hpp"

namespace bnac {

BayesianNetwork parse_network(std::string_view text);
void write_network(const BayesianNetwork& net, std::ostream& out);

Evidence parse_evidence(std::string_view text, const BayesianNetwork& net);
void write_evidence(const Evidence& ev, const BayesianNetwork& net, std::ostream& out);

struct NamedCase {
  std::string name;
  Evidence evidence;
};
// Text before the first "case" header, if any, forms a case named "default".
std::vector<NamedCase> parse_cases(std::string_view text, const BayesianNetwork& net);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace bnac
