#pragma once

#include "solver.hpp"

namespace polyinv {

// Standalone constraint-pair input: antecedent polynomials (one per line,
// meaning >= 0), a `|-` separator, then the consequent. Identifiers listed in
// a `unknowns:` header are template unknowns; everything else is a program
// variable. `target: <unknown> <value>` lines assemble the objective and
// `mode: strict|nonstrict` picks the decomposition form.
struct PairsFile {
  VarTable vars;
  UnknownTable unknowns;
  std::map<std::string, int> unknown_ids;
  std::vector<ConstraintPair> pairs;
  Objective objective;
  std::optional<bool> strict_mode;
};

PairsFile parse_pairs_file(const std::string& text);

}  // namespace polyinv
