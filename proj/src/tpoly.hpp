#pragma once

#include "coefexpr.hpp"
#include "monomial.hpp"

namespace polyinv {

// Polynomial over program variables with rational coefficients.
struct RPoly {
  std::map<Monomial, Rat> terms;

  static RPoly constant(const Rat& q) {
    RPoly p;
    if (q != 0) p.terms[Monomial::one()] = q;
    return p;
  }
  bool is_zero() const { return terms.empty(); }
  RPoly& operator+=(const RPoly& o);
  RPoly operator+(const RPoly& o) const {
    RPoly r = *this;
    r += o;
    return r;
  }
  RPoly operator-(const RPoly& o) const { return *this + o.scaled(-1); }
  RPoly operator*(const RPoly& o) const;
  RPoly scaled(const Rat& k) const;
  Rat eval(const std::map<int, Rat>& point) const;  // absent vars read as 0
  Rat max_abs_coef() const;
  Rat coef(const Monomial& m) const {
    auto it = terms.find(m);
    return it == terms.end() ? Rat(0) : it->second;
  }
  bool operator==(const RPoly& o) const { return terms == o.terms; }
  std::string str(const VarTable& vars, bool decimal = false) const;
};

// Polynomial over program variables whose coefficients are (degree <= 2)
// expressions in the unknown template variables.
struct TPoly {
  std::map<Monomial, CoefExpr> terms;

  static TPoly zero() { return {}; }
  static TPoly constant(const Rat& q) { return from_coef(Monomial::one(), CoefExpr::constant(q)); }
  static TPoly var(int id) { return from_coef(Monomial::var(id), CoefExpr::constant(1)); }
  static TPoly from_coef(const Monomial& m, const CoefExpr& ce) {
    TPoly p;
    if (!ce.is_zero()) p.terms[m] = ce;
    return p;
  }
  static TPoly from_rpoly(const RPoly& rp) {
    TPoly p;
    for (auto& [m, q] : rp.terms) p.terms[m] = CoefExpr::constant(q);
    return p;
  }

  bool is_zero() const { return terms.empty(); }
  bool is_constant_one() const;

  TPoly& operator+=(const TPoly& o);
  TPoly operator+(const TPoly& o) const {
    TPoly r = *this;
    r += o;
    return r;
  }
  TPoly operator-(const TPoly& o) const { return *this + o.scaled(-1); }
  TPoly operator*(const TPoly& o) const;  // throws if unknown-degree exceeds 2
  TPoly scaled(const Rat& k) const;

  int pdegree() const {
    int d = 0;
    for (auto& [m, ce] : terms) d = std::max(d, m.degree());
    return d;
  }
  std::vector<int> vars() const;      // sorted ids occurring
  std::vector<int> unknowns() const;  // sorted unknown ids occurring

  // Simultaneous substitution; variables not in alpha map to themselves.
  TPoly substitute(const std::map<int, TPoly>& alpha) const;

  // Rename variables (a special case of substitute, kept cheap).
  TPoly rename(const std::map<int, int>& renaming) const;

  RPoly eval_unknowns(const std::vector<Rat>& sigma) const;
  Rat eval_point(const std::map<int, Rat>& point, const std::vector<Rat>& sigma) const;

  bool operator==(const TPoly& o) const { return terms == o.terms; }
  std::string str(const VarTable& vars, const UnknownTable& u) const;
};

// Conjunction of non-strict atoms `poly >= 0`; true is the single atom [1].
struct AtomConj {
  std::vector<TPoly> atoms;
  static AtomConj trivial() {
    AtomConj c;
    c.atoms.push_back(TPoly::constant(1));
    return c;
  }
};

// Atom of a propositional polynomial predicate: poly > 0 or poly >= 0.
struct Atom {
  TPoly poly;
  bool strict = false;
};

struct Pred {
  enum Kind { ATOM, AND, OR, NOT } kind = ATOM;
  Atom atom;
  std::vector<Pred> kids;

  static Pred make_atom(Atom a) {
    Pred p;
    p.kind = ATOM;
    p.atom = std::move(a);
    return p;
  }
  static Pred make(Kind k, std::vector<Pred> kids) {
    Pred p;
    p.kind = k;
    p.kids = std::move(kids);
    return p;
  }
  bool operator==(const Pred& o) const;
  std::string str(const VarTable& vars, const UnknownTable& u) const;
};

// Negation pushed to atoms, distributed to DNF; strict atoms relaxed to
// non-strict on the way into antecedent position. Deterministic disjunct
// order (left-to-right distribution).
std::vector<AtomConj> normalize_predicate(const Pred& phi);

// Exact truth value under a valuation (strictness honored); used by the
// path sampler, not by constraint generation.
bool pred_holds(const Pred& phi, const std::map<int, Rat>& point, const std::vector<Rat>& sigma);

}  // namespace polyinv
