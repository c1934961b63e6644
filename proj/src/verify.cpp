#include "verify.hpp"

#include <sstream>

namespace polyinv {

std::vector<Rat> to_exact(const std::vector<double>& x) {
  std::vector<Rat> out;
  out.reserve(x.size());
  for (double v : x) out.push_back(rat_from_double(v));
  return out;
}

RPoly gram_expansion(const SosBlock& blk, const std::vector<Monomial>& ymonos,
                     const std::vector<Rat>& sigma) {
  int ydim = blk.ydim;
  auto lv = [&](int r, int c) { return sigma.at(blk.l_ids[r * (r + 1) / 2 + c]); };
  RPoly out;
  for (int r = 0; r < ydim; ++r)
    for (int c = 0; c <= r; ++c) {
      Rat q = 0;
      for (int k = 0; k <= c; ++k) q += lv(r, k) * lv(c, k);
      if (r != c) q *= 2;
      if (q == 0) continue;
      Monomial m = ymonos[r].times(ymonos[c]);
      auto it = out.terms.find(m);
      if (it == out.terms.end())
        out.terms[m] = q;
      else {
        it->second += q;
        if (it->second == 0) out.terms.erase(it);
      }
    }
  return out;
}

Certificate verify(const std::vector<ConstraintPair>& pairs, const QuadSystem& sys,
                   const std::vector<Rat>& sigma) {
  const Rat tol(1, 1000000000);  // 1e-9, exact
  Certificate cert;
  cert.strict = sys.strict;
  cert.pass = true;
  if (pairs.size() != sys.decomps.size())
    throw std::logic_error("verify: pair/decomposition mismatch");

  for (size_t pi = 0; pi < pairs.size(); ++pi) {
    const ConstraintPair& pr = pairs[pi];
    const PairDecomp& d = sys.decomps[pi];
    PairVerdict v;
    v.pair_id = pr.id;
    v.origin = pr.origin;
    v.pass = true;

    RPoly delta = pr.g.eval_unknowns(sigma);
    if (sys.strict) {
      v.eps = sigma.at(d.eps_id);
      if (v.eps < tol) {
        v.pass = false;
        v.detail = "positivity witness below 1e-9";
      }
      delta += RPoly::constant(-v.eps);
    }
    for (size_t i = 0; i < d.blocks.size(); ++i) {
      const SosBlock& blk = d.blocks[i];
      for (int r = 0; r < blk.ydim; ++r) {
        if (sigma.at(blk.l_ids[r * (r + 1) / 2 + r]) < 0) {
          v.pass = false;
          v.detail = "negative diagonal Cholesky entry";
        }
      }
      RPoly h = gram_expansion(blk, d.ymonos, sigma);
      if (i == 0)
        delta += h.scaled(-1);
      else
        delta += (h * pr.gamma[i - 1].eval_unknowns(sigma)).scaled(-1);
    }
    v.max_residual = delta.max_abs_coef();
    if (v.max_residual > tol) {
      v.pass = false;
      if (v.detail.empty()) v.detail = "decomposition defect above 1e-9";
    }
    if (!v.pass) cert.pass = false;
    if (v.max_residual > cert.worst_residual) cert.worst_residual = v.max_residual;
    cert.pairs.push_back(std::move(v));
  }
  cert.message = cert.pass ? "all pairs certified" : "certification failed";
  return cert;
}

InvariantReport instantiate(const TemplateMap& tm, const std::vector<Rat>& sigma) {
  InvariantReport rep;
  for (auto& [l, conj] : tm.eta) {
    std::vector<RPoly> insts;
    for (auto& t : conj) insts.push_back(t.eval_unknowns(sigma));
    rep.label_assertions[l] = std::move(insts);
  }
  for (auto& [fi, conj] : tm.mu) {
    std::vector<RPoly> insts;
    for (auto& t : conj) insts.push_back(t.eval_unknowns(sigma));
    rep.post_conditions[fi] = std::move(insts);
  }
  return rep;
}

RPoly normalize_max_abs(const RPoly& p) {
  Rat m = p.max_abs_coef();
  if (m == 0) return p;
  return p.scaled(1 / m);
}

double normalized_linf_distance(const RPoly& a, const RPoly& b) {
  RPoly na = normalize_max_abs(a), nb = normalize_max_abs(b);
  RPoly diff = na - nb;
  return rat_to_double(diff.max_abs_coef());
}

}  // namespace polyinv
