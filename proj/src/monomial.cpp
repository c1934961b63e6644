#include "monomial.hpp"

namespace polyinv {

Monomial Monomial::times(const Monomial& o) const {
  Monomial r;
  size_t i = 0, j = 0;
  while (i < exps.size() || j < o.exps.size()) {
    if (j == o.exps.size() || (i < exps.size() && exps[i].first < o.exps[j].first)) {
      r.exps.push_back(exps[i++]);
    } else if (i == exps.size() || o.exps[j].first < exps[i].first) {
      r.exps.push_back(o.exps[j++]);
    } else {
      r.exps.push_back({exps[i].first, exps[i].second + o.exps[j].second});
      ++i;
      ++j;
    }
  }
  return r;
}

bool Monomial::operator<(const Monomial& o) const {
  int da = degree(), db = o.degree();
  if (da != db) return da < db;
  size_t i = 0, j = 0;
  while (i < exps.size() && j < o.exps.size()) {
    if (exps[i].first != o.exps[j].first) {
      // the one holding a positive exponent on the smaller id is "larger
      // at the front", hence earlier in the order
      return exps[i].first < o.exps[j].first;
    }
    if (exps[i].second != o.exps[j].second) return exps[i].second > o.exps[j].second;
    ++i;
    ++j;
  }
  return i < exps.size();
}

std::string Monomial::str(const VarTable& vars) const {
  if (exps.empty()) return "1";
  std::string s;
  for (auto& [v, e] : exps) {
    if (!s.empty()) s += "*";
    s += vars.name(v);
    if (e > 1) s += "^" + std::to_string(e);
  }
  return s;
}

static void enumerate_exact(const std::vector<int>& vars, size_t idx, int remaining,
                            Monomial& cur, std::vector<Monomial>& out) {
  if (idx == vars.size()) {
    if (remaining == 0) out.push_back(cur);
    return;
  }
  // higher exponent on the earlier variable first
  for (int e = remaining; e >= 0; --e) {
    size_t save = cur.exps.size();
    if (e > 0) cur.exps.push_back({vars[idx], e});
    enumerate_exact(vars, idx + 1, remaining - e, cur, out);
    cur.exps.resize(save);
  }
}

std::vector<Monomial> monomials_up_to(const std::vector<int>& vars, int d) {
  std::vector<Monomial> out;
  Monomial cur;
  for (int deg = 0; deg <= d; ++deg) enumerate_exact(vars, 0, deg, cur, out);
  return out;
}

}  // namespace polyinv
