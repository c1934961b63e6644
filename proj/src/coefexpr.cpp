#include "coefexpr.hpp"

#include <algorithm>

namespace polyinv {

namespace {

void add_lin(std::vector<std::pair<int, Rat>>& dst, int id, const Rat& k) {
  auto it = std::lower_bound(dst.begin(), dst.end(), id,
                             [](const auto& p, int v) { return p.first < v; });
  if (it != dst.end() && it->first == id) {
    it->second += k;
    if (it->second == 0) dst.erase(it);
  } else if (k != 0) {
    dst.insert(it, {id, k});
  }
}

void add_quad(std::vector<std::tuple<int, int, Rat>>& dst, int a, int b, const Rat& k) {
  if (a > b) std::swap(a, b);
  auto key = std::make_pair(a, b);
  auto it = std::lower_bound(dst.begin(), dst.end(), key, [](const auto& t, const auto& kk) {
    return std::make_pair(std::get<0>(t), std::get<1>(t)) < kk;
  });
  if (it != dst.end() && std::get<0>(*it) == a && std::get<1>(*it) == b) {
    std::get<2>(*it) += k;
    if (std::get<2>(*it) == 0) dst.erase(it);
  } else if (k != 0) {
    dst.insert(it, {a, b, k});
  }
}

}  // namespace

CoefExpr& CoefExpr::operator+=(const CoefExpr& o) {
  c += o.c;
  for (auto& [id, k] : o.lin) add_lin(lin, id, k);
  for (auto& [a, b, k] : o.quad) add_quad(quad, a, b, k);
  return *this;
}

CoefExpr CoefExpr::scaled(const Rat& k) const {
  CoefExpr r;
  if (k == 0) return r;
  r.c = c * k;
  r.lin = lin;
  for (auto& [id, q] : r.lin) q *= k;
  r.quad = quad;
  for (auto& t : r.quad) std::get<2>(t) *= k;
  return r;
}

CoefExpr CoefExpr::operator*(const CoefExpr& o) const {
  if (udegree() + o.udegree() > 2) throw unknown_degree_overflow();
  CoefExpr r;
  r.c = c * o.c;
  for (auto& [id, k] : o.lin) add_lin(r.lin, id, c * k);
  for (auto& [id, k] : lin) add_lin(r.lin, id, k * o.c);
  for (auto& [a, b, k] : o.quad) add_quad(r.quad, a, b, c * k);
  for (auto& [a, b, k] : quad) add_quad(r.quad, a, b, k * o.c);
  for (auto& [i, ki] : lin)
    for (auto& [j, kj] : o.lin) add_quad(r.quad, i, j, ki * kj);
  return r;
}

Rat CoefExpr::eval(const std::vector<Rat>& sigma) const {
  Rat v = c;
  for (auto& [id, k] : lin) v += k * sigma.at(id);
  for (auto& [a, b, k] : quad) v += k * sigma.at(a) * sigma.at(b);
  return v;
}

double CoefExpr::eval_d(const std::vector<double>& x) const {
  double v = rat_to_double(c);
  for (auto& [id, k] : lin) v += rat_to_double(k) * x[id];
  for (auto& [a, b, k] : quad) v += rat_to_double(k) * x[a] * x[b];
  return v;
}

std::vector<int> CoefExpr::unknowns() const {
  std::vector<int> ids;
  for (auto& [id, k] : lin) ids.push_back(id);
  for (auto& [a, b, k] : quad) {
    ids.push_back(a);
    ids.push_back(b);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::string CoefExpr::str(const UnknownTable& u) const {
  struct Term {
    Rat k;
    std::string body;  // "" for constant
  };
  std::vector<Term> terms;
  if (c != 0) terms.push_back({c, ""});
  for (auto& [id, k] : lin) terms.push_back({k, u.name(id)});
  for (auto& [a, b, k] : quad) {
    std::string body = a == b ? u.name(a) + "^2" : u.name(a) + "*" + u.name(b);
    terms.push_back({k, body});
  }
  if (terms.empty()) return "0";
  std::string s;
  for (size_t i = 0; i < terms.size(); ++i) {
    Rat k = terms[i].k;
    bool neg = k < 0;
    if (neg) k = -k;
    if (i == 0)
      s += neg ? "-" : "";
    else
      s += neg ? " - " : " + ";
    if (terms[i].body.empty())
      s += rat_to_string(k);
    else if (k == 1)
      s += terms[i].body;
    else
      s += rat_to_string(k) + "*" + terms[i].body;
  }
  return s;
}

}  // namespace polyinv
