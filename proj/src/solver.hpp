#pragma once

#include "encoder.hpp"

namespace polyinv {

struct Objective {
  std::vector<std::pair<int, double>> targets;  // (unknown id, desired value)
  CoefExpr expr;                                // sum of squared distances, for export
  std::string desc;
};

struct SolverConfig {
  int starts = 16;
  unsigned long long seed = 0;
  int max_iters = 300;  // per continuation round
  double tau_res = 1e-12;
  double eps_min = 1e-9;
  double timeout_sec = 3600;
  int threads = 0;  // 0 = hardware concurrency
};

struct Solution {
  bool ok = false;  // feasibility residual <= tau_res
  std::vector<double> x;
  double feas = 0;             // sum of squared equality residuals + bound violations
  double max_eq_residual = 0;  // max |e_k|
  double obj = 0;
  int start = -1;
  long total_iters = 0;
  bool timed_out = false;
  std::string message;
  // accepted penalty values per continuation round of the winning start
  std::vector<std::vector<double>> penalty_trace;
};

Solution solve(const QuadSystem& sys, const Objective& obj, const SolverConfig& cfg);

// Feasibility residual of a concrete point (used by tests).
double feas_residual(const QuadSystem& sys, const std::vector<double>& x, double eps_min);

}  // namespace polyinv
