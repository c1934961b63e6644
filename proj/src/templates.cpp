#include "templates.hpp"

#include <sstream>

namespace polyinv {

TemplateMap make_invariant_templates(const Program& p, UnknownTable& unknowns, int n, int d) {
  if (n < 1 || d < 1) throw semantic_error("template size and degree must be >= 1");
  TemplateMap tm;
  tm.n = n;
  tm.d = d;
  for (int l = 1; l <= p.label_count(); ++l) {
    const Function& fn = p.funcs[p.func_of_label(l)];
    auto monos = monomials_up_to(fn.vars, d);
    tm.label_monomials[l] = monos;
    std::vector<std::vector<int>> svars(n);
    std::vector<TPoly> conjuncts;
    for (int i = 1; i <= n; ++i) {
      TPoly t;
      for (size_t j = 0; j < monos.size(); ++j) {
        int id = unknowns.add(UnknownKind::STemplate,
                              "s_" + std::to_string(l) + "_" + std::to_string(i) + "_" +
                                  std::to_string(j + 1),
                              /*bounded_below=*/false, /*unit_hint=*/j == 0);
        svars[i - 1].push_back(id);
        t += TPoly::from_coef(monos[j], CoefExpr::unknown(id));
      }
      conjuncts.push_back(std::move(t));
    }
    tm.eta[l] = std::move(conjuncts);
    tm.eta_svars[l] = std::move(svars);
  }
  return tm;
}

void make_post_templates(const Program& p, UnknownTable& unknowns, TemplateMap& tm) {
  for (size_t fi = 0; fi < p.funcs.size(); ++fi) {
    const Function& fn = p.funcs[fi];
    std::vector<int> vars = fn.bars;  // frozen copies, then the return value
    vars.push_back(fn.ret);
    auto monos = monomials_up_to(vars, tm.d);
    tm.fn_monomials[static_cast<int>(fi)] = monos;
    std::vector<std::vector<int>> svars(tm.n);
    std::vector<TPoly> conjuncts;
    for (int i = 1; i <= tm.n; ++i) {
      TPoly t;
      for (size_t j = 0; j < monos.size(); ++j) {
        int id = unknowns.add(UnknownKind::SPost,
                              "s_" + fn.name + "_" + std::to_string(i) + "_" +
                                  std::to_string(j + 1),
                              /*bounded_below=*/false, /*unit_hint=*/j == 0);
        svars[i - 1].push_back(id);
        t += TPoly::from_coef(monos[j], CoefExpr::unknown(id));
      }
      conjuncts.push_back(std::move(t));
    }
    tm.mu[static_cast<int>(fi)] = std::move(conjuncts);
    tm.mu_svars[static_cast<int>(fi)] = std::move(svars);
  }
}

std::string dump_templates(const TemplateMap& tm, const Program& p, const UnknownTable& u) {
  std::ostringstream os;
  for (auto& [l, conj] : tm.eta) {
    for (size_t i = 0; i < conj.size(); ++i)
      os << "eta(" << l << ")." << i + 1 << ": " << conj[i].str(p.vars, u) << " > 0\n";
  }
  for (auto& [fi, conj] : tm.mu) {
    for (size_t i = 0; i < conj.size(); ++i)
      os << "mu(" << p.funcs[fi].name << ")." << i + 1 << ": " << conj[i].str(p.vars, u)
         << " > 0\n";
  }
  return os.str();
}

}  // namespace polyinv
