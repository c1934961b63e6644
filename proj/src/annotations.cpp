#include "annotations.hpp"

#include <sstream>

namespace polyinv {

Annotations collect_annotations(const Program& p) {
  if (!p.labeled) throw std::logic_error("collect_annotations: program not labeled");
  Annotations a;
  for (int l = 1; l <= p.label_count(); ++l) {
    const LabelInfo& li = p.label(l);
    if (li.stmt) {
      if (!li.stmt->pre_atoms.empty()) a.pre[l] = li.stmt->pre_atoms;
      if (!li.stmt->target_atoms.empty()) a.targets[l] = li.stmt->target_atoms;
    }
  }
  for (auto& fn : p.funcs) {
    if (!fn.end_pre.empty()) {
      auto& v = a.pre[fn.lout];
      v.insert(v.end(), fn.end_pre.begin(), fn.end_pre.end());
    }
    if (!fn.end_targets.empty()) {
      auto& v = a.targets[fn.lout];
      v.insert(v.end(), fn.end_targets.begin(), fn.end_targets.end());
    }
  }
  return a;
}

void inject_implicit_pre(Annotations& a, const Program& p, std::optional<Rat> bound) {
  a.bound = bound;
  for (size_t fi = 0; fi < p.funcs.size(); ++fi) {
    const Function& fn = p.funcs[fi];
    auto& entry = a.pre[fn.lin];
    auto is_param_or_bar = [&](int v) {
      for (int q : fn.params)
        if (q == v) return true;
      for (int q : fn.bars)
        if (q == v) return true;
      return false;
    };
    // uninitialized non-parameter variables are 0 at entry
    for (int v : fn.vars) {
      if (is_param_or_bar(v)) continue;
      Atom up, down;
      up.poly = TPoly::var(v);
      down.poly = TPoly::var(v).scaled(-1);
      entry.push_back(up);
      entry.push_back(down);
    }
    // each parameter equals its frozen copy at entry
    for (size_t i = 0; i < fn.params.size(); ++i) {
      Atom d1, d2;
      d1.poly = TPoly::var(fn.params[i]) - TPoly::var(fn.bars[i]);
      d2.poly = TPoly::var(fn.bars[i]) - TPoly::var(fn.params[i]);
      entry.push_back(d1);
      entry.push_back(d2);
    }
  }
  if (bound) {
    Rat c = *bound;
    if (c <= 0) throw semantic_error("bound must be positive");
    for (int l = 1; l <= p.label_count(); ++l) {
      const Function& fn = p.funcs[p.func_of_label(l)];
      auto& atoms = a.pre[l];
      TPoly ball = TPoly::constant(c * c * Rat(static_cast<long>(fn.vars.size())));
      for (int v : fn.vars) {
        Atom lo, hi;
        lo.poly = TPoly::var(v) + TPoly::constant(c);
        hi.poly = TPoly::constant(c) - TPoly::var(v);
        atoms.push_back(lo);
        atoms.push_back(hi);
        ball = ball - TPoly::var(v) * TPoly::var(v);
      }
      Atom b;
      b.poly = ball;
      atoms.push_back(b);
    }
  }
}

std::string dump_annotations(const Annotations& a, const Program& p) {
  std::ostringstream os;
  UnknownTable dummy;
  for (auto& [l, atoms] : a.pre) {
    os << "Pre(" << l << "):";
    for (auto& at : atoms) os << " (" << at.poly.str(p.vars, dummy) << " >= 0)";
    os << "\n";
  }
  for (auto& [l, atoms] : a.targets) {
    os << "Target(" << l << "):";
    for (auto& at : atoms)
      os << " (" << at.poly.str(p.vars, dummy) << (at.strict ? " > 0)" : " >= 0)");
    os << "\n";
  }
  return os.str();
}

}  // namespace polyinv
