#pragma once

#include "templates.hpp"

namespace polyinv {

// (Gamma, g): if every antecedent is non-negative, the consequent must be
// positive (strict mode) or non-negative (non-strict mode).
struct ConstraintPair {
  int id = -1;
  std::string origin;   // "edge(3->4)", "init(sum)", "post(8->9)", "call(4->5)"
  int conjunct = 1;     // 1-based index into eta/mu
  int disjunct = 1;     // 1-based DNF disjunct (guards)
  std::vector<TPoly> gamma;
  TPoly g;
  std::vector<int> vars;  // V(lambda): variables of g and the antecedents
};

struct PairGenConfig {
  bool recursive_mode = false;
};

std::vector<ConstraintPair> generate_pairs(Program& p, const Cfg& cfg, const Annotations& ann,
                                           const TemplateMap& tm, const PairGenConfig& cfgen);

std::string dump_pairs(const std::vector<ConstraintPair>& pairs, const Program& p,
                       const UnknownTable& u);

}  // namespace polyinv
