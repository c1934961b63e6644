#pragma once

#include "constraints.hpp"

namespace polyinv {

struct QuadConstraint {
  enum Kind { Eq, Nonneg } kind = Eq;
  CoefExpr expr;  // Eq: expr = 0; Nonneg: expr is a single unknown >= 0
  int pair_id = -1;
  std::string tag;  // provenance: monomial, "sos<i> <monomial>", "diag", "epsilon"
};

struct SosBlock {
  std::vector<int> t_ids;  // one per h-monomial
  std::vector<int> l_ids;  // lower-triangular, row-major
  int ydim = 0;
};

// Which unknowns realize a pair's decomposition; enough to rebuild the h_i
// exactly from a solution.
struct PairDecomp {
  int pair_id = -1;
  std::vector<int> vars;
  std::vector<Monomial> hmonos;  // degree <= Upsilon over vars
  std::vector<Monomial> ymonos;  // degree <= floor(Upsilon/2)
  std::vector<SosBlock> blocks;  // h_0 .. h_m
  int eps_id = -1;               // strict mode only
};

struct QuadSystem {
  UnknownTable unknowns;
  std::vector<QuadConstraint> constraints;
  std::vector<PairDecomp> decomps;
  bool strict = true;
  int upsilon = 1;
  int size() const { return static_cast<int>(constraints.size()); }
};

// SOS side conditions for one multiplier: h_i == y^T L L^T y with fresh
// lower-triangular L, plus non-negativity of the diagonal entries.
std::vector<QuadConstraint> sos_constraints(const std::vector<int>& t_ids,
                                            const std::vector<Monomial>& hmonos,
                                            const std::vector<Monomial>& ymonos, int pair_id,
                                            int block_index, const VarTable& vars,
                                            UnknownTable& unknowns, std::vector<int>& l_ids_out);

// Coefficient matching for g = eps + h_0 + sum h_i*g_i (or without eps),
// followed by the SOS conditions of every h_i.
void encode_pair(const ConstraintPair& pair, int upsilon, bool strict, const VarTable& vars,
                 UnknownTable& unknowns, std::vector<QuadConstraint>& out, PairDecomp& decomp);

QuadSystem assemble_system(const std::vector<ConstraintPair>& pairs, int upsilon, bool strict,
                           const VarTable& vars, UnknownTable unknowns);

// Byte-stable dump: one constraint per line, `E:`/`N:` prefixed.
std::string dump_system(const QuadSystem& sys);

}  // namespace polyinv
