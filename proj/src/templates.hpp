#pragma once

#include "annotations.hpp"

namespace polyinv {

// Unknown-coefficient templates: one conjunction of n generic polynomials of
// degree <= d per label, and (with summaries enabled) one per function over
// the return variable and the frozen parameter copies.
struct TemplateMap {
  int n = 1, d = 1;
  std::map<int, std::vector<TPoly>> eta;  // label -> n conjuncts
  std::map<int, std::vector<TPoly>> mu;   // function index -> n conjuncts
  std::map<int, std::vector<Monomial>> label_monomials;  // label -> M_d over V^f
  std::map<int, std::vector<Monomial>> fn_monomials;     // function -> M_d over {bars, ret}
  // s-variable ids: [label or function][conjunct][monomial]
  std::map<int, std::vector<std::vector<int>>> eta_svars;
  std::map<int, std::vector<std::vector<int>>> mu_svars;
};

TemplateMap make_invariant_templates(const Program& p, UnknownTable& unknowns, int n, int d);

// Adds the per-function post-condition templates (recursive mode).
void make_post_templates(const Program& p, UnknownTable& unknowns, TemplateMap& tm);

std::string dump_templates(const TemplateMap& tm, const Program& p, const UnknownTable& u);

}  // namespace polyinv
