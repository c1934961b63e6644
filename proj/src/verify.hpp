#pragma once

#include "solver.hpp"

namespace polyinv {

struct PairVerdict {
  int pair_id = -1;
  std::string origin;
  bool pass = false;
  Rat max_residual = 0;  // largest |coefficient| of the decomposition defect
  Rat eps = 0;           // strict mode witness
  std::string detail;
};

struct Certificate {
  bool pass = false;
  bool strict = true;
  std::vector<PairVerdict> pairs;
  Rat worst_residual = 0;
  std::string message;
};

// Exact rational value of each binary float; throws on NaN/Inf.
std::vector<Rat> to_exact(const std::vector<double>& x);

// Plugs sigma back into every pair's decomposition, with each h_i rebuilt
// exactly from its Cholesky factor, and checks the defect coefficientwise
// against 1e-9, the positivity witnesses against 1e-9, and the diagonal
// factor entries against 0.
Certificate verify(const std::vector<ConstraintPair>& pairs, const QuadSystem& sys,
                   const std::vector<Rat>& sigma);

struct InvariantReport {
  bool strict = true;
  std::map<int, std::vector<RPoly>> label_assertions;  // eta under sigma
  std::map<int, std::vector<RPoly>> post_conditions;   // mu under sigma, by function
  std::vector<int> claimed_labels;  // labels whose assertions the certificate covers
};

InvariantReport instantiate(const TemplateMap& tm, const std::vector<Rat>& sigma);

// Scale-invariant comparison: both sides normalized to max-abs coefficient 1.
double normalized_linf_distance(const RPoly& a, const RPoly& b);

RPoly normalize_max_abs(const RPoly& p);

// Exact Gram expansion y^T L L^T y for one SOS block under sigma.
RPoly gram_expansion(const SosBlock& blk, const std::vector<Monomial>& ymonos,
                     const std::vector<Rat>& sigma);

}  // namespace polyinv
