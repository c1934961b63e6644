#pragma once

#include "core.hpp"

namespace polyinv {

struct unknown_degree_overflow : std::runtime_error {
  unknown_degree_overflow()
      : std::runtime_error("coefficient expression would exceed degree 2 in unknowns") {}
};

// Coefficient of a template polynomial: an expression of degree <= 2 in the
// unknown template variables, with exact rational scalars. Canonical form:
// terms sorted by unknown id, no zero scalars.
struct CoefExpr {
  Rat c;                                       // constant term
  std::vector<std::pair<int, Rat>> lin;        // (unknown, scalar), sorted
  std::vector<std::tuple<int, int, Rat>> quad; // (u, v, scalar), u<=v, sorted

  CoefExpr() : c(0) {}
  static CoefExpr constant(const Rat& q) {
    CoefExpr e;
    e.c = q;
    return e;
  }
  static CoefExpr unknown(int id, const Rat& scale = 1) {
    CoefExpr e;
    if (scale != 0) e.lin.push_back({id, scale});
    return e;
  }

  bool is_zero() const { return c == 0 && lin.empty() && quad.empty(); }
  bool is_constant() const { return lin.empty() && quad.empty(); }
  int udegree() const { return !quad.empty() ? 2 : (!lin.empty() ? 1 : 0); }

  CoefExpr& operator+=(const CoefExpr& o);
  CoefExpr operator+(const CoefExpr& o) const {
    CoefExpr r = *this;
    r += o;
    return r;
  }
  CoefExpr operator-(const CoefExpr& o) const { return *this + o.scaled(-1); }
  CoefExpr operator*(const CoefExpr& o) const;  // throws on degree > 2
  CoefExpr scaled(const Rat& k) const;

  Rat eval(const std::vector<Rat>& sigma) const;
  double eval_d(const std::vector<double>& x) const;

  bool operator==(const CoefExpr& o) const {
    return c == o.c && lin == o.lin && quad == o.quad;
  }

  // Canonical rendering, e.g. "1/2 - t_3_0_1 + 2*s_1_1_1*t_3_10_1".
  std::string str(const UnknownTable& u) const;

  // Every unknown id occurring in this expression, sorted.
  std::vector<int> unknowns() const;
};

}  // namespace polyinv
