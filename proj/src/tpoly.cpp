#include "tpoly.hpp"

#include <algorithm>

namespace polyinv {

RPoly& RPoly::operator+=(const RPoly& o) {
  for (auto& [m, q] : o.terms) {
    auto it = terms.find(m);
    if (it == terms.end()) {
      if (q != 0) terms[m] = q;
    } else {
      it->second += q;
      if (it->second == 0) terms.erase(it);
    }
  }
  return *this;
}

RPoly RPoly::operator*(const RPoly& o) const {
  RPoly r;
  for (auto& [ma, qa] : terms)
    for (auto& [mb, qb] : o.terms) {
      Monomial m = ma.times(mb);
      auto it = r.terms.find(m);
      if (it == r.terms.end())
        r.terms[m] = qa * qb;
      else {
        it->second += qa * qb;
        if (it->second == 0) r.terms.erase(it);
      }
    }
  return r;
}

RPoly RPoly::scaled(const Rat& k) const {
  RPoly r;
  if (k == 0) return r;
  for (auto& [m, q] : terms) r.terms[m] = q * k;
  return r;
}

Rat RPoly::eval(const std::map<int, Rat>& point) const {
  Rat v = 0;
  for (auto& [m, q] : terms) {
    Rat t = q;
    for (auto& [var, e] : m.exps) {
      auto it = point.find(var);
      Rat x = it == point.end() ? Rat(0) : it->second;
      for (int i = 0; i < e; ++i) t *= x;
    }
    v += t;
  }
  return v;
}

Rat RPoly::max_abs_coef() const {
  Rat m = 0;
  for (auto& [mono, q] : terms) {
    Rat a = q < 0 ? Rat(-q) : q;
    if (a > m) m = a;
  }
  return m;
}

std::string RPoly::str(const VarTable& vars, bool decimal) const {
  if (terms.empty()) return "0";
  std::string s;
  bool first = true;
  for (auto& [m, q] : terms) {
    Rat k = q;
    bool neg = k < 0;
    if (neg) k = -k;
    s += first ? (neg ? "-" : "") : (neg ? " - " : " + ");
    first = false;
    std::string ks = decimal ? rat_to_decimal(k) : rat_to_string(k);
    if (m.is_one())
      s += ks;
    else if (k == 1)
      s += m.str(vars);
    else
      s += ks + "*" + m.str(vars);
  }
  return s;
}

bool TPoly::is_constant_one() const {
  if (terms.size() != 1) return false;
  auto& [m, ce] = *terms.begin();
  return m.is_one() && ce.is_constant() && ce.c == 1;
}

TPoly& TPoly::operator+=(const TPoly& o) {
  for (auto& [m, ce] : o.terms) {
    auto it = terms.find(m);
    if (it == terms.end()) {
      if (!ce.is_zero()) terms[m] = ce;
    } else {
      it->second += ce;
      if (it->second.is_zero()) terms.erase(it);
    }
  }
  return *this;
}

TPoly TPoly::operator*(const TPoly& o) const {
  TPoly r;
  for (auto& [ma, ca] : terms)
    for (auto& [mb, cb] : o.terms) {
      Monomial m = ma.times(mb);
      CoefExpr prod = ca * cb;
      auto it = r.terms.find(m);
      if (it == r.terms.end()) {
        if (!prod.is_zero()) r.terms[m] = prod;
      } else {
        it->second += prod;
        if (it->second.is_zero()) r.terms.erase(it);
      }
    }
  return r;
}

TPoly TPoly::scaled(const Rat& k) const {
  TPoly r;
  if (k == 0) return r;
  for (auto& [m, ce] : terms) r.terms[m] = ce.scaled(k);
  return r;
}

std::vector<int> TPoly::vars() const {
  std::vector<int> ids;
  for (auto& [m, ce] : terms)
    for (auto& [v, e] : m.exps) ids.push_back(v);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<int> TPoly::unknowns() const {
  std::vector<int> ids;
  for (auto& [m, ce] : terms) {
    auto u = ce.unknowns();
    ids.insert(ids.end(), u.begin(), u.end());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

TPoly TPoly::substitute(const std::map<int, TPoly>& alpha) const {
  TPoly out;
  for (auto& [m, ce] : terms) {
    TPoly acc = TPoly::from_coef(Monomial::one(), ce);
    for (auto& [var, e] : m.exps) {
      auto it = alpha.find(var);
      TPoly base = it == alpha.end() ? TPoly::var(var) : it->second;
      for (int i = 0; i < e; ++i) acc = acc * base;
    }
    out += acc;
  }
  return out;
}

TPoly TPoly::rename(const std::map<int, int>& renaming) const {
  TPoly out;
  for (auto& [m, ce] : terms) {
    Monomial nm;
    for (auto& [v, e] : m.exps) {
      auto it = renaming.find(v);
      nm = nm.times(Monomial::var(it == renaming.end() ? v : it->second, e));
    }
    auto it = out.terms.find(nm);
    if (it == out.terms.end())
      out.terms[nm] = ce;
    else {
      it->second += ce;
      if (it->second.is_zero()) out.terms.erase(it);
    }
  }
  return out;
}

RPoly TPoly::eval_unknowns(const std::vector<Rat>& sigma) const {
  RPoly r;
  for (auto& [m, ce] : terms) {
    Rat v = ce.eval(sigma);
    if (v != 0) r.terms[m] = v;
  }
  return r;
}

Rat TPoly::eval_point(const std::map<int, Rat>& point, const std::vector<Rat>& sigma) const {
  Rat v = 0;
  for (auto& [m, ce] : terms) {
    Rat t = ce.eval(sigma);
    if (t == 0) continue;
    for (auto& [var, e] : m.exps) {
      auto it = point.find(var);
      Rat x = it == point.end() ? Rat(0) : it->second;
      for (int i = 0; i < e; ++i) t *= x;
    }
    v += t;
  }
  return v;
}

std::string TPoly::str(const VarTable& vars, const UnknownTable& u) const {
  if (terms.empty()) return "0";
  std::string s;
  bool first = true;
  for (auto& [m, ce] : terms) {
    if (!first) s += " + ";
    first = false;
    if (ce.is_constant()) {
      Rat k = ce.c;
      if (m.is_one())
        s += rat_to_string(k);
      else if (k == 1)
        s += m.str(vars);
      else
        s += rat_to_string(k) + "*" + m.str(vars);
    } else {
      std::string coef = ce.str(u);
      bool simple = ce.lin.size() + ce.quad.size() == 1 && ce.c == 0;
      if (!simple) coef = "(" + coef + ")";
      s += m.is_one() ? coef : coef + "*" + m.str(vars);
    }
  }
  return s;
}

bool Pred::operator==(const Pred& o) const {
  if (kind != o.kind) return false;
  if (kind == ATOM) return atom.poly == o.atom.poly && atom.strict == o.atom.strict;
  return kids == o.kids;
}

std::string Pred::str(const VarTable& vars, const UnknownTable& u) const {
  switch (kind) {
    case ATOM:
      return atom.poly.str(vars, u) + (atom.strict ? " > 0" : " >= 0");
    case NOT:
      return "not (" + kids[0].str(vars, u) + ")";
    case AND:
    case OR: {
      std::string op = kind == AND ? " and " : " or ";
      std::string s;
      for (size_t i = 0; i < kids.size(); ++i) {
        if (i) s += op;
        bool paren = kids[i].kind == OR || (kids[i].kind == AND && kind == OR);
        s += paren ? "(" + kids[i].str(vars, u) + ")" : kids[i].str(vars, u);
      }
      return s;
    }
  }
  return "";
}

namespace {

// Negation-normal form with negation folded into atoms:
// not(e >= 0) -> -e > 0, not(e > 0) -> -e >= 0.
Pred to_nnf(const Pred& p, bool negate) {
  switch (p.kind) {
    case Pred::ATOM: {
      if (!negate) return p;
      Atom a;
      a.poly = p.atom.poly.scaled(-1);
      a.strict = !p.atom.strict;
      return Pred::make_atom(a);
    }
    case Pred::NOT:
      return to_nnf(p.kids[0], !negate);
    case Pred::AND:
    case Pred::OR: {
      Pred::Kind k = p.kind;
      if (negate) k = k == Pred::AND ? Pred::OR : Pred::AND;
      std::vector<Pred> kids;
      for (auto& c : p.kids) kids.push_back(to_nnf(c, negate));
      return Pred::make(k, std::move(kids));
    }
  }
  return p;
}

std::vector<std::vector<TPoly>> dnf(const Pred& p) {
  switch (p.kind) {
    case Pred::ATOM:
      // strict antecedent atoms relax to non-strict here
      return {{p.atom.poly}};
    case Pred::OR: {
      std::vector<std::vector<TPoly>> out;
      for (auto& c : p.kids) {
        auto sub = dnf(c);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    case Pred::AND: {
      std::vector<std::vector<TPoly>> out = {{}};
      for (auto& c : p.kids) {
        auto sub = dnf(c);
        std::vector<std::vector<TPoly>> next;
        for (auto& a : out)
          for (auto& b : sub) {
            auto joined = a;
            joined.insert(joined.end(), b.begin(), b.end());
            next.push_back(std::move(joined));
          }
        out = std::move(next);
      }
      return out;
    }
    case Pred::NOT:
      break;  // eliminated by NNF
  }
  throw std::logic_error("dnf: predicate not in NNF");
}

}  // namespace

std::vector<AtomConj> normalize_predicate(const Pred& phi) {
  Pred nnf = to_nnf(phi, false);
  std::vector<AtomConj> out;
  for (auto& d : dnf(nnf)) {
    AtomConj conj;
    conj.atoms = d;
    if (conj.atoms.empty()) conj = AtomConj::trivial();
    out.push_back(std::move(conj));
  }
  return out;
}

bool pred_holds(const Pred& phi, const std::map<int, Rat>& point, const std::vector<Rat>& sigma) {
  switch (phi.kind) {
    case Pred::ATOM: {
      Rat v = phi.atom.poly.eval_point(point, sigma);
      return phi.atom.strict ? v > 0 : v >= 0;
    }
    case Pred::NOT:
      return !pred_holds(phi.kids[0], point, sigma);
    case Pred::AND:
      for (auto& c : phi.kids)
        if (!pred_holds(c, point, sigma)) return false;
      return true;
    case Pred::OR:
      for (auto& c : phi.kids)
        if (pred_holds(c, point, sigma)) return true;
      return false;
  }
  return false;
}

}  // namespace polyinv
