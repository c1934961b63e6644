#include "encoder.hpp"

#include <sstream>

namespace polyinv {

std::vector<QuadConstraint> sos_constraints(const std::vector<int>& t_ids,
                                            const std::vector<Monomial>& hmonos,
                                            const std::vector<Monomial>& ymonos, int pair_id,
                                            int block_index, const VarTable& vars,
                                            UnknownTable& unknowns, std::vector<int>& l_ids_out) {
  int ydim = static_cast<int>(ymonos.size());
  std::string base =
      "l_" + std::to_string(pair_id) + "_" + std::to_string(block_index) + "_";
  std::vector<int> l_ids;
  for (int r = 0; r < ydim; ++r)
    for (int c = 0; c <= r; ++c) {
      int k = static_cast<int>(l_ids.size()) + 1;
      l_ids.push_back(unknowns.add(UnknownKind::L, base + std::to_string(k),
                                   /*bounded_below=*/r == c));
    }
  auto lid = [&](int r, int c) { return l_ids[r * (r + 1) / 2 + c]; };

  // y^T (L L^T) y expanded over the program variables
  TPoly expansion;
  for (int r = 0; r < ydim; ++r) {
    for (int c = 0; c <= r; ++c) {
      CoefExpr q;  // (L L^T)[r][c]
      for (int k = 0; k <= c; ++k)
        q += CoefExpr::unknown(lid(r, k)) * CoefExpr::unknown(lid(c, k));
      if (r != c) q = q.scaled(2);
      expansion += TPoly::from_coef(ymonos[r].times(ymonos[c]), q);
    }
  }

  TPoly h;
  for (size_t j = 0; j < hmonos.size(); ++j)
    h += TPoly::from_coef(hmonos[j], CoefExpr::unknown(t_ids[j]));

  TPoly diff = h - expansion;
  std::vector<QuadConstraint> out;
  for (auto& [m, ce] : diff.terms) {
    QuadConstraint qc;
    qc.kind = QuadConstraint::Eq;
    qc.expr = ce;
    qc.pair_id = pair_id;
    qc.tag = "sos" + std::to_string(block_index) + " " + m.str(vars);
    out.push_back(std::move(qc));
  }
  for (int r = 0; r < ydim; ++r) {
    QuadConstraint qc;
    qc.kind = QuadConstraint::Nonneg;
    qc.expr = CoefExpr::unknown(lid(r, r));
    qc.pair_id = pair_id;
    qc.tag = "diag" + std::to_string(block_index);
    out.push_back(std::move(qc));
  }
  l_ids_out = std::move(l_ids);
  return out;
}

void encode_pair(const ConstraintPair& pair, int upsilon, bool strict, const VarTable& vars,
                 UnknownTable& unknowns, std::vector<QuadConstraint>& out, PairDecomp& decomp) {
  decomp.pair_id = pair.id;
  decomp.vars = pair.vars;
  decomp.hmonos = monomials_up_to(pair.vars, upsilon);
  decomp.ymonos = monomials_up_to(pair.vars, upsilon / 2);

  int m = static_cast<int>(pair.gamma.size());
  std::vector<TPoly> h(m + 1);
  decomp.blocks.resize(m + 1);
  for (int i = 0; i <= m; ++i) {
    for (size_t j = 0; j < decomp.hmonos.size(); ++j) {
      int id = unknowns.add(UnknownKind::T, "t_" + std::to_string(pair.id) + "_" +
                                                std::to_string(i) + "_" + std::to_string(j + 1));
      decomp.blocks[i].t_ids.push_back(id);
      h[i] += TPoly::from_coef(decomp.hmonos[j], CoefExpr::unknown(id));
    }
    decomp.blocks[i].ydim = static_cast<int>(decomp.ymonos.size());
  }
  if (strict)
    decomp.eps_id = unknowns.add(UnknownKind::Eps, "eps_" + std::to_string(pair.id),
                                 /*bounded_below=*/true);

  TPoly rhs = h[0];
  if (strict) rhs += TPoly::from_coef(Monomial::one(), CoefExpr::unknown(decomp.eps_id));
  for (int i = 1; i <= m; ++i) rhs += h[i] * pair.gamma[i - 1];

  TPoly diff = pair.g - rhs;
  for (auto& [mono, ce] : diff.terms) {
    QuadConstraint qc;
    qc.kind = QuadConstraint::Eq;
    qc.expr = ce;
    qc.pair_id = pair.id;
    qc.tag = mono.str(vars);
    out.push_back(std::move(qc));
  }

  for (int i = 0; i <= m; ++i) {
    auto sos = sos_constraints(decomp.blocks[i].t_ids, decomp.hmonos, decomp.ymonos, pair.id, i,
                               vars, unknowns, decomp.blocks[i].l_ids);
    for (auto& qc : sos) out.push_back(std::move(qc));
  }

  if (strict) {
    QuadConstraint qc;
    qc.kind = QuadConstraint::Nonneg;
    qc.expr = CoefExpr::unknown(decomp.eps_id);
    qc.pair_id = pair.id;
    qc.tag = "epsilon";
    out.push_back(std::move(qc));
  }
}

QuadSystem assemble_system(const std::vector<ConstraintPair>& pairs, int upsilon, bool strict,
                           const VarTable& vars, UnknownTable unknowns) {
  QuadSystem sys;
  sys.unknowns = std::move(unknowns);
  sys.strict = strict;
  sys.upsilon = upsilon;
  for (auto& pr : pairs) {
    PairDecomp d;
    encode_pair(pr, upsilon, strict, vars, sys.unknowns, sys.constraints, d);
    sys.decomps.push_back(std::move(d));
  }
  return sys;
}

std::string dump_system(const QuadSystem& sys) {
  std::ostringstream os;
  os << "quadsys strict=" << (sys.strict ? 1 : 0) << " upsilon=" << sys.upsilon
     << " unknowns=" << sys.unknowns.size() << " constraints=" << sys.size() << "\n";
  for (auto& qc : sys.constraints) {
    os << (qc.kind == QuadConstraint::Eq ? "E" : "N") << "[" << qc.pair_id << ":" << qc.tag
       << "]: " << qc.expr.str(sys.unknowns) << (qc.kind == QuadConstraint::Eq ? " = 0" : " >= 0")
       << "\n";
  }
  return os.str();
}

}  // namespace polyinv
