#pragma once

#include "core.hpp"

namespace polyinv {

// Sparse monomial over program variables. Exponent pairs are sorted by
// variable id; ids are assigned in the canonical per-function order
// (parameters, frozen copies, locals, return variable), so id order is the
// variable order used by the graded-lex monomial order.
struct Monomial {
  std::vector<std::pair<int, int>> exps;  // (var id, exponent>0), sorted by id

  static Monomial one() { return {}; }
  static Monomial var(int id, int e = 1) {
    Monomial m;
    if (e > 0) m.exps.push_back({id, e});
    return m;
  }

  int degree() const {
    int d = 0;
    for (auto& [v, e] : exps) d += e;
    return d;
  }
  int exponent(int var) const {
    for (auto& [v, e] : exps)
      if (v == var) return e;
    return 0;
  }
  bool is_one() const { return exps.empty(); }

  Monomial times(const Monomial& o) const;

  bool operator==(const Monomial& o) const { return exps == o.exps; }
  // Graded-lex: lower total degree first; within a degree class the
  // monomial with the larger exponent on the first differing variable
  // comes first (so n^2 precedes n*i precedes i^2).
  bool operator<(const Monomial& o) const;

  std::string str(const VarTable& vars) const;  // "n*r^2", "1" for the unit
};

// All monomials of degree <= d over `vars` (given in canonical order),
// graded-lex ordered, starting with the constant monomial.
// Count is C(|vars|+d, d).
std::vector<Monomial> monomials_up_to(const std::vector<int>& vars, int d);

}  // namespace polyinv
