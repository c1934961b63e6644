#pragma once

#include "verify.hpp"

namespace polyinv {

struct EmpiricalConfig {
  long trials = 10000;
  unsigned long long seed = 0;
  int grid_halfwidth = 80;  // samples k/grid_denom for k in [-80, 80] -> [-10, 10]
  int grid_denom = 8;
  int rejection_cap = 400;  // per sampled point
};

struct Counterexample {
  int from_label = -1;
  int to_label = -1;
  std::map<int, Rat> before, after;
  std::string what;
};

struct EmpiricalResult {
  bool pass = false;
  bool inconclusive = false;  // sampling starvation
  long checked = 0;           // valid unit paths actually exercised
  long starved = 0;
  std::optional<Counterexample> cex;
  std::string detail;
};

// Samples valid unit (abstract) paths of the program and checks initiation,
// consecution, and post-condition consecution of the instantiated invariant.
EmpiricalResult empirical_check(const Program& p, const Cfg& cfg, const Annotations& ann,
                                const InvariantReport& inv, const EmpiricalConfig& ecfg);

std::string describe_counterexample(const Counterexample& cex, const Program& p);

}  // namespace polyinv
